"""Laplace transform of the delay density, delay moments and counting statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import dynamics
from .params import AtomDriveParams, ConvergenceError, DomainError, ParameterError

POLE_RTOL = 1e-14
#: counting windows shorter than this many mean delays are flagged
ASYMPTOTIC_WINDOWS = 10.0


@dataclass(frozen=True)
class DelayMoments:
    mean_delay: float
    delay_variance: float
    mandel_q: float


@dataclass(frozen=True)
class CountingStats:
    """Mean and variance of the photon number counted in windows of length ``window``.

    ``n_windows`` and ``q_standard_error`` are only set for empirical
    estimates.  ``below_asymptotic_threshold`` flags analytic results where the
    window is too short for the Gaussian regime to be trusted.
    """

    window: float
    mean_count: float
    count_variance: float
    n_windows: int | None = None
    q_standard_error: float | None = None
    below_asymptotic_threshold: bool = False

    @property
    def q_estimate(self) -> float:
        return self.count_variance / self.mean_count - 1.0


def _k_denominator(params: AtomDriveParams, s):
    g, w2, d2 = params.gamma, params.omega**2, params.delta**2
    t1 = s * (s + 2 * g) * ((s + g) ** 2 + d2)
    t2 = w2 * (s + g) ** 2
    return t1 + t2, np.abs(t1) + np.abs(t2)


def laplace_K(params: AtomDriveParams, s):
    """Rational Laplace transform of the delay density K.

    Raises DomainError when ``s`` sits on a pole, i.e. when the denominator
    cancels to below ``POLE_RTOL`` of the magnitude of its terms.
    """
    s = np.asarray(s, dtype=complex)
    g = params.gamma
    den, scale = _k_denominator(params, s)
    if np.any(np.abs(den) <= POLE_RTOL * scale):
        raise DomainError(f"laplace_K evaluated at a pole: s={s!r}")
    out = g * params.omega**2 * (s + g) / den
    return complex(out) if out.ndim == 0 else out


def _decay_rate(params: AtomDriveParams) -> float:
    # slowest exponential decay rate of K
    return params.gamma - abs(dynamics.complex_chi(params).real)


def laplace_K_numeric_oracle(params: AtomDriveParams, s: complex, tail_tol: float = 1e-12) -> complex:
    """Direct quadrature of the defining integral of the Laplace transform.

    The integral is truncated at the first ``T = 10 * 2^k / gamma`` whose tail
    bound is below ``tail_tol``.  For ``Re(s) >= 0`` the bound
    ``exp(-Re(s) T) P(T)`` is rigorous; for ``Re(s) < 0`` it is scaled by the
    slowest decay rate of K.
    """
    params.require_drive()
    s = complex(s)
    sigma = s.real
    mu = _decay_rate(params)
    if sigma <= -mu:
        raise DomainError(f"integral diverges: Re(s)={sigma!r} <= -{mu!r}")

    def tail_bound(T):
        bound = math.exp(-sigma * T) * float(dynamics.survival(params, T))
        if sigma < 0:
            bound *= mu / (mu + sigma)
        return bound

    T = 10.0 / params.gamma
    while tail_bound(T) >= tail_tol:
        T *= 2.0
        if T > 1e9 / params.gamma:
            raise ConvergenceError("could not bound the quadrature tail")

    # panels short enough to resolve the oscillations of K and of e^{-s tau}
    freq = abs(s.imag) + abs(dynamics.complex_chi(params).imag) + params.gamma
    width = min(T, 2.0 / freq)
    edges = np.linspace(0.0, T, int(math.ceil(T / width)) + 1)

    def part(fn):
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            val, err = integrate.quad(fn, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=200)
            if not math.isfinite(val):
                raise ConvergenceError("quadrature returned a non-finite value")
            total += val
        return total

    def kern(tau):
        return complex(np.exp(-s * tau) * dynamics.delay_density(params, tau))

    re = part(lambda t: kern(t).real)
    im = part(lambda t: kern(t).imag) if s.imag != 0 else 0.0
    return complex(re, im)


def delay_moments(params: AtomDriveParams) -> DelayMoments:
    """Mean, variance of the delay between photons and the Mandel Q factor."""
    params.require_drive()
    g2, d2, w2 = params.gamma**2, params.delta**2, params.omega**2
    base = 2.0 * (g2 + d2) + w2
    mean = base / (params.gamma * w2)
    var = (4.0 * (g2 + d2) ** 2 + 2.0 * (3.0 * d2 - g2) * w2 + w2 * w2) / (g2 * w2 * w2)
    q = 2.0 * (d2 - 3.0 * g2) * w2 / (base * base)
    return DelayMoments(mean, var, q)


def mandel_q(params: AtomDriveParams) -> float:
    return delay_moments(params).mandel_q


def _log_k(params, s):
    return math.log(laplace_K(params, s).real)


def _singularity_radius(params: AtomDriveParams) -> float:
    # distance from s=0 to the nearest zero or pole of K~, i.e. to the
    # nearest singularity of ln K~
    g, w2, d2 = params.gamma, params.omega**2, params.delta**2
    # s (s + 2g) ((s+g)^2 + d2) + w2 (s+g)^2, expanded
    coeffs = [1.0, 4 * g, 5 * g * g + d2 + w2, 2 * g * (g * g + d2) + 2 * g * w2, g * g * w2]
    return min(g, float(np.min(np.abs(np.roots(coeffs)))))


def moments_from_logderivative_oracle(params: AtomDriveParams, h: float | None = None) -> DelayMoments:
    """Moments from finite differences of ``ln K~(s)`` at ``s = 0``.

    Central differences with step ``h`` and ``h/2`` combined by one
    Richardson extrapolation.  The default step is ``1e-4`` times the
    distance to the nearest singularity of ``ln K~`` (at most ``gamma``).
    """
    params.require_drive()
    if h is None:
        h = 1e-4 * _singularity_radius(params)
    f0 = _log_k(params, 0.0)

    def d1(step):
        return (_log_k(params, step) - _log_k(params, -step)) / (2 * step)

    def d2(step):
        return (_log_k(params, step) - 2 * f0 + _log_k(params, -step)) / step**2

    mean = -(4 * d1(h / 2) - d1(h)) / 3
    var = (4 * d2(h / 2) - d2(h)) / 3
    return DelayMoments(mean, var, var / mean**2 - 1.0)


def counting_stats(params: AtomDriveParams, window: float) -> CountingStats:
    """Gaussian-regime counting statistics for a long window ``T``.

    Only meaningful for ``T >> mean delay``; windows below
    ``ASYMPTOTIC_WINDOWS`` mean delays are returned with a flag set.
    """
    params.require_drive()
    if not window > 0:
        raise ParameterError(f"window must be > 0, got {window!r}")
    m = delay_moments(params)
    mean = window / m.mean_delay
    return CountingStats(
        window=float(window),
        mean_count=mean,
        count_variance=mean * (1.0 + m.mandel_q),
        below_asymptotic_threshold=window < ASYMPTOTIC_WINDOWS * m.mean_delay,
    )
