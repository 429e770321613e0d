"""Photon correlation J(t), its pole decomposition, and the intensity noise spectrum.

J(t) dt is the probability of detecting *a* photon (not necessarily the next
one) at time t after a detection at 0.  Its Laplace transform is the
geometric series ``K~ / (1 - K~)``, a rational function with a pole at
``s = 0`` (residue: the mean intensity) and three further poles that give
the transient ``Delta J(t) = sum_m rho_m exp(-r_m t)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import dynamics, laplace
from .params import AtomDriveParams, DegenerateRootsError, DomainError, ParameterError

# companion-matrix roots split an exact double root by ~sqrt(eps), so a
# tighter threshold cannot see true degeneracy
DEGENERACY_TOL = 1e-6
RECONSTRUCTION_TOL = 1e-7
RESONANT_SERIES_THRESHOLD = 1e-3


@dataclass(frozen=True)
class PoleDecomposition:
    """``J~(s) = mean_intensity / s + sum_m residues[m] / (s + rates[m])``."""

    params: AtomDriveParams
    mean_intensity: float
    rates: tuple
    residues: tuple

    @property
    def poles(self):
        return list(zip(self.rates, self.residues))

    def delta_j(self, t):
        """Transient part ``Delta J(t)`` for ``t >= 0``, real-valued."""
        t = np.asarray(t, dtype=float)
        total = np.zeros(t.shape, dtype=complex)
        for r, rho in zip(self.rates, self.residues):
            total = total + rho * np.exp(-r * t)
        return total.real

    def delta_j_laplace(self, s):
        s = np.asarray(s, dtype=complex)
        return sum(rho / (s + r) for r, rho in zip(self.rates, self.residues))

    def laplace_j(self, s):
        s = np.asarray(s, dtype=complex)
        return self.mean_intensity / s + self.delta_j_laplace(s)


@dataclass(frozen=True)
class CorrelationCurve:
    """A correlation curve sampled on non-negative lags.

    ``kind`` is ``"J"`` (raw), ``"j"`` (normalised by the mean intensity) or
    ``"C_I"`` (smooth part of the intensity correlation).  Curves are even in
    the lag when ``even`` is set; only ``t >= 0`` is stored.  The Dirac
    self-detection term of C_I is kept as ``delta_weight``, never sampled.
    """

    lags: np.ndarray
    values: np.ndarray
    kind: str
    errors: np.ndarray | None = None
    even: bool = False
    delta_weight: float | None = None
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SpectrumCurve:
    frequencies: np.ndarray
    q_values: np.ndarray
    s_values: np.ndarray
    mean_intensity: float


def _cubic_coefficients(params: AtomDriveParams):
    # (s + 2g)((s + g)^2 + d^2) + W^2 (s + g)
    g, d2, w2 = params.gamma, params.delta**2, params.omega**2
    return np.array([1.0, 4.0 * g, 5.0 * g * g + d2 + w2, 2.0 * g * (g * g + d2) + g * w2])


def _cubic(params, s):
    g = params.gamma
    return (s + 2 * g) * ((s + g) ** 2 + params.delta**2) + params.omega**2 * (s + g)


def _cubic_scale(params, s):
    g = params.gamma
    return np.abs((s + 2 * g) * ((s + g) ** 2 + params.delta**2)) + np.abs(params.omega**2 * (s + g))


def mean_intensity(params: AtomDriveParams) -> float:
    """Mean photon emission rate, the reciprocal of the mean delay."""
    params.require_drive()
    w2 = params.omega**2
    return params.gamma * w2 / (2.0 * (params.gamma**2 + params.delta**2) + w2)


def laplace_J(params: AtomDriveParams, s):
    """Rational Laplace transform of J."""
    s = np.asarray(s, dtype=complex)
    g = params.gamma
    den = s * _cubic(params, s)
    if np.any(np.abs(den) <= laplace.POLE_RTOL * np.abs(s) * _cubic_scale(params, s)) or np.any(s == 0):
        raise DomainError(f"laplace_J evaluated at a pole: s={s!r}")
    out = g * params.omega**2 * (s + g) / den
    return complex(out) if out.ndim == 0 else out


def _cubic_roots(params: AtomDriveParams, method: str = "auto") -> np.ndarray:
    if method not in ("auto", "companion"):
        raise ParameterError(f"unknown root method {method!r}")
    g = params.gamma
    if params.delta == 0.0 and method == "auto":
        # (s + g)(s^2 + 3 g s + 2 g^2 + W^2); discriminant formed without cancellation
        f = np.sqrt(complex(g * g / 4.0 - params.omega**2))
        return np.array([-1.5 * g + f, -1.5 * g - f, -g], dtype=complex)
    coeffs = _cubic_coefficients(params)
    roots = np.roots(coeffs)  # companion-matrix eigenvalues
    deriv = np.polyder(coeffs)
    # one Newton polish step
    polished = roots - np.polyval(coeffs, roots) / np.polyval(deriv, roots)
    better = np.abs(np.polyval(coeffs, polished)) <= np.abs(np.polyval(coeffs, roots))
    return np.where(better, polished, roots)


def pole_decomposition(params: AtomDriveParams, method: str = "auto") -> PoleDecomposition:
    """Partial-fraction decomposition of J~ over the roots of its cubic denominator.

    Repeated roots (pairwise distance below ``DEGENERACY_TOL * gamma``), or
    residues that fail to cancel the mean intensity at ``t = 0``, raise
    DegenerateRootsError; confluent ``t exp(-r t)`` terms are not produced.

    Roots come from the companion matrix with one Newton polish, except at
    zero detuning where the cubic factors exactly (``method="companion"``
    forces the general path).
    """
    params.require_drive()
    roots = _cubic_roots(params, method)
    for z1, z2 in itertools.combinations(roots, 2):
        if abs(z1 - z2) < DEGENERACY_TOL * params.gamma:
            raise DegenerateRootsError("correlation cubic has a repeated root", params)
    # real-coefficient cubic: force exact conjugate symmetry
    roots = _symmetrize(roots)
    g, w2 = params.gamma, params.omega**2
    # derivative of the monic cubic at each root, as a product of root gaps
    deriv = np.array([np.prod([z - w for k, w in enumerate(roots) if k != m]) for m, z in enumerate(roots)])
    residues = g * w2 * (roots + g) / (roots * deriv)
    rates = -roots
    if np.any(rates.real <= 0):
        raise DomainError(f"non-decaying pole in correlation function: {rates!r}")
    mean = mean_intensity(params)
    # J(0) = 0 requires the residues to cancel the mean intensity
    if abs(mean + residues.sum()) > RECONSTRUCTION_TOL * mean:
        raise DegenerateRootsError("ill-conditioned pole decomposition", params)
    return PoleDecomposition(
        params=params,
        mean_intensity=mean,
        rates=tuple(complex(r) for r in rates),
        residues=tuple(complex(r) for r in residues),
    )


def _symmetrize(roots: np.ndarray) -> np.ndarray:
    roots = roots.astype(complex)
    out = roots.copy()
    used = set()
    for i, z in enumerate(roots):
        if i in used:
            continue
        if abs(z.imag) <= 1e-14 * max(1.0, abs(z)):
            out[i] = z.real
            used.add(i)
            continue
        j = min((k for k in range(len(roots)) if k != i and k not in used),
                key=lambda k: abs(roots[k] - z.conjugate()))
        mid = 0.5 * (z + roots[j].conjugate())
        out[i], out[j] = mid, mid.conjugate()
        used.update((i, j))
    return out


def j_of_t(params: AtomDriveParams, t, poles: PoleDecomposition | None = None):
    """Normalised correlation ``j(t) = J(t) / I`` for ``t >= 0``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ParameterError("t must be >= 0")
    if poles is None:
        poles = pole_decomposition(params)
    out = 1.0 + poles.delta_j(t) / poles.mean_intensity
    return float(out) if out.ndim == 0 else out


def correlation_curve(params: AtomDriveParams, t) -> CorrelationCurve:
    poles = pole_decomposition(params)
    t = np.asarray(t, dtype=float)
    return CorrelationCurve(lags=t, values=np.atleast_1d(j_of_t(params, t, poles)), kind="j",
                            even=True, meta={"mean_intensity": poles.mean_intensity})


def j_convolution_oracle(params: AtomDriveParams, t_grid, n_max: int) -> CorrelationCurve:
    """``J = K_1 + ... + K_n_max`` by repeated discrete convolution on a grid.

    The grid must be uniform and start at 0.  Since every ``K_n`` vanishes at
    the origin, the trapezoid rule reduces to a plain Riemann sum.  The
    truncated sum is only trustworthy for ``t`` well below ``n_max`` mean
    delays.
    """
    if n_max < 1:
        raise ParameterError(f"n_max must be >= 1, got {n_max!r}")
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2 or t[0] != 0.0:
        raise ParameterError("t_grid must be a 1-d grid starting at 0")
    h = t[1] - t[0]
    if not np.allclose(np.diff(t), h, rtol=1e-9, atol=0.0):
        raise ParameterError("t_grid must be uniform")
    params.require_drive()
    tau_mean = laplace.delay_moments(params).mean_delay
    if h > tau_mean / 50.0:
        raise ParameterError(f"grid step {h!r} too coarse, must be <= mean delay / 50 = {tau_mean / 50.0!r}")
    k = dynamics.delay_density(params, t)
    term = k.copy()
    total = k.copy()
    for _ in range(n_max - 1):
        term = h * np.convolve(k, term)[: t.size]
        total += term
    return CorrelationCurve(lags=t, values=total, kind="J", meta={"n_max": n_max})


def intensity_correlation(params: AtomDriveParams, t):
    """Return ``(delta_weight, smooth)`` of the intensity correlation C_I(t).

    ``delta_weight`` multiplies the Dirac self-detection term; ``smooth`` is
    ``I * Delta J(|t|)``, even in t.
    """
    poles = pole_decomposition(params)
    t = np.abs(np.asarray(t, dtype=float))
    smooth = poles.mean_intensity * poles.delta_j(t)
    return poles.mean_intensity**2, (float(smooth) if smooth.ndim == 0 else smooth)


def delta_j_laplace(params: AtomDriveParams, s):
    """Laplace transform of the transient part of J, regular at ``s = 0``."""
    s = np.asarray(s, dtype=complex)
    g = params.gamma
    num = mean_intensity(params) * (g * g + params.delta**2 - (s + 2 * g) ** 2)
    return num / _cubic(params, s)


def noise_spectrum(params: AtomDriveParams, omega):
    """``(Q(omega), S_I(omega))`` with ``S_I = I (1 + Q(omega))``."""
    omega = np.asarray(omega, dtype=float)
    q = (delta_j_laplace(params, 1j * omega) + delta_j_laplace(params, -1j * omega)).real
    s_i = mean_intensity(params) * (1.0 + q)
    if q.ndim == 0:
        return float(q), float(s_i)
    return q, s_i


def default_frequency_grid(params: AtomDriveParams, points: int = 400) -> np.ndarray:
    return params.gamma * np.logspace(-2.0, 2.0, points)


def spectrum_curve(params: AtomDriveParams, omega=None) -> SpectrumCurve:
    if omega is None:
        omega = default_frequency_grid(params)
    omega = np.asarray(omega, dtype=float)
    q, s_i = noise_spectrum(params, omega)
    return SpectrumCurve(omega, np.atleast_1d(q), np.atleast_1d(s_i), mean_intensity(params))


def _cosh_and_sinhc(x):
    # cosh(x) and sinh(x)/x for complex x, with series near 0
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < RESONANT_SERIES_THRESHOLD
    xs = np.where(small, 0.0, x)
    with np.errstate(invalid="ignore", divide="ignore"):
        ch = np.where(small, 1 + x * x / 2 + x**4 / 24, np.cosh(xs))
        sc = np.where(small, 1 + x * x / 6 + x**4 / 120, np.sinh(xs) / np.where(small, 1.0, xs))
    return ch, sc


def j_resonant(params: AtomDriveParams, t):
    """Closed form of j(t) at zero detuning.

    ``1 - exp(-3 g t / 2) (cosh(F t) + (3 g / 2F) sinh(F t))`` with
    ``F = sqrt(g^2/4 - W^2)``; the ``F -> 0`` limit is taken by series.
    """
    if params.delta != 0.0:
        raise ParameterError(f"j_resonant requires delta == 0, got {params.delta!r}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ParameterError("t must be >= 0")
    g = params.gamma
    f = np.sqrt(complex(g * g / 4.0 - params.omega**2))
    x = f * t
    # keep exponent of cosh/sinh bounded: Re(f) <= g/2 so Re(x) - 3 g t / 2 <= -g t
    damp = np.exp(-1.5 * g * t)
    big = np.abs(x) > 50.0
    if np.any(big):
        em = np.exp(x - 1.5 * g * t)
        ep = np.exp(-x - 1.5 * g * t)
        tail = 0.5 * (em + ep) + 1.5 * g * t * 0.5 * (em - ep) / np.where(big, x, 1.0)
    else:
        tail = 0.0
    ch, sc = _cosh_and_sinhc(np.where(big, 0.0, x))
    core = damp * (ch + 1.5 * g * t * sc)
    out = (1.0 - np.where(big, tail, core)).real
    return float(out) if out.ndim == 0 else out


def resonant_mean_intensity(params: AtomDriveParams) -> float:
    params.require_drive()
    w2 = params.omega**2
    return params.gamma * w2 / (2.0 * params.gamma**2 + w2)


def j_perturbative(params: AtomDriveParams, t):
    """Weak-excitation form ``|1 - exp(-(g - i d) t)|^2``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ParameterError("t must be >= 0")
    out = np.abs(-np.expm1(-complex(params.gamma, -params.delta) * t)) ** 2
    return float(out) if out.ndim == 0 else out


def perturbative_mean_intensity(params: AtomDriveParams) -> float:
    params.require_drive()
    return params.gamma * params.omega**2 / (2.0 * (params.gamma**2 + params.delta**2))
