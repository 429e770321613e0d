"""Reversible evolution inside one dressed-atom multiplicity.

After a photon is emitted the atom restarts in the ground state ``|g, n>`` and
is coupled by the laser to ``|e, n-1>``.  The two amplitudes obey::

    a' = -i (Omega/2) b
    b' = -i (Omega/2) a - (gamma - i delta) b

with ``a(0) = 1, b(0) = 0``.  The total population ``P = |a|^2 + |b|^2`` is the
probability that no photon has been emitted yet, and ``K = 2 gamma |b|^2 = -P'``
is the probability density of the delay to the next photon.

Everything here is vectorised over ``tau``; the scalar wrappers return the
small dataclasses used elsewhere in the package.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .params import AtomDriveParams, ParameterError

#: below this value of ``|chi tau / 2|`` cosh and sinh(x)/x are summed as series
SERIES_THRESHOLD = 1e-3
_SERIES_TERMS = 6


@dataclass(frozen=True)
class AmplitudePair:
    a_ground: complex
    b_excited: complex
    tau: float


@dataclass(frozen=True)
class DelayPointEval:
    """Delay statistics at one delay ``tau``.

    ``density_K == intensity_lambda * survival_P`` and
    ``survival_P == exp(-cumulative_Lambda)``.
    """

    tau: float
    survival_P: float
    density_K: float
    intensity_lambda: float
    cumulative_Lambda: float


def complex_chi(params: AtomDriveParams) -> complex:
    """Principal square root of ``(gamma - i delta)^2 - Omega^2``.

    Either sign would do: every amplitude formula is even in chi.
    """
    c = complex(params.gamma, -params.delta)
    return cmath.sqrt(c * c - params.omega**2)


def _cosh_series(x):
    total = np.zeros_like(x)
    term = np.ones_like(x)
    x2 = x * x
    for k in range(_SERIES_TERMS):
        total = total + term
        term = term * x2 / ((2 * k + 1) * (2 * k + 2))
    return total


def _sinhc_series(x):
    # sinh(x) / x
    total = np.zeros_like(x)
    term = np.ones_like(x)
    x2 = x * x
    for k in range(_SERIES_TERMS):
        total = total + term
        term = term * x2 / ((2 * k + 2) * (2 * k + 3))
    return total


def scaled_amplitudes(params: AtomDriveParams, tau, chi: complex | None = None):
    """Return ``(a_hat, b_hat, log_scale)`` with ``a = a_hat * exp(log_scale)``.

    The common exponential factor is kept in log form so that very long
    delays neither overflow cosh/sinh nor underflow the populations.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ParameterError("tau must be >= 0")
    shape = tau.shape
    if params.omega == 0:
        # undriven atom: stays in the ground state, exactly
        one = np.ones(shape, dtype=complex)
        return one, np.zeros(shape, dtype=complex), np.zeros(shape, dtype=complex)
    tau = tau.reshape(-1)
    if chi is None:
        chi = complex_chi(params)
    c_rate = complex(params.gamma, -params.delta)
    half = tau / 2.0
    x = chi * half
    c = c_rate * half
    small = np.abs(x) < SERIES_THRESHOLD

    a_hat = np.empty(tau.shape, dtype=complex)
    b_hat = np.empty(tau.shape, dtype=complex)
    log_scale = np.empty(tau.shape, dtype=complex)

    if np.any(small):
        xs, hs = x[small], half[small]
        shc = _sinhc_series(xs)
        a_hat[small] = _cosh_series(xs) + c_rate * hs * shc
        b_hat[small] = -1j * params.omega * hs * shc
        log_scale[small] = -c[small]

    big = ~small
    if np.any(big):
        xb, hb = x[big], half[big]
        # cosh(x) e^{-c} = e^{x-c} (1 + e^{-2x}) / 2
        # sinh(x) e^{-c} = -e^{x-c} expm1(-2x) / 2
        em = np.exp(-2.0 * xb)
        shc = -np.expm1(-2.0 * xb) / (2.0 * xb)
        a_hat[big] = 0.5 * (1.0 + em) + c_rate * hb * shc
        b_hat[big] = -1j * params.omega * hb * shc
        log_scale[big] = xb - c[big]

    return a_hat.reshape(shape), b_hat.reshape(shape), log_scale.reshape(shape)


def amplitudes(params: AtomDriveParams, tau, chi: complex | None = None):
    """Vectorised closed-form amplitudes ``(a, b)``."""
    a_hat, b_hat, log_scale = scaled_amplitudes(params, tau, chi)
    scale = np.exp(log_scale)
    return a_hat * scale, b_hat * scale


def amplitudes_closed_form(params: AtomDriveParams, tau: float) -> AmplitudePair:
    a, b = amplitudes(params, float(tau))
    return AmplitudePair(complex(a), complex(b), float(tau))


def _rk4_step(a, b, h, half_omega, c_rate):
    def rhs(a, b):
        return -1j * half_omega * b, -1j * half_omega * a - c_rate * b

    k1a, k1b = rhs(a, b)
    k2a, k2b = rhs(a + 0.5 * h * k1a, b + 0.5 * h * k1b)
    k3a, k3b = rhs(a + 0.5 * h * k2a, b + 0.5 * h * k2b)
    k4a, k4b = rhs(a + h * k3a, b + h * k3b)
    return (
        a + h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a),
        b + h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b),
    )


def ode_trajectory(params: AtomDriveParams, taus, step: float):
    """Integrate the amplitude equations with classical RK4 and sample at ``taus``.

    Each interval between consecutive sample points is split into equal
    substeps no longer than ``step``.  Independent of the closed form; used
    as its oracle.
    """
    if not step > 0:
        raise ParameterError(f"step must be > 0, got {step!r}")
    taus = np.asarray(taus, dtype=float)
    if np.any(taus < 0):
        raise ParameterError("tau must be >= 0")
    order = np.argsort(taus, kind="stable")
    out_a = np.empty(taus.shape, dtype=complex)
    out_b = np.empty(taus.shape, dtype=complex)
    half_omega = 0.5 * params.omega
    c_rate = complex(params.gamma, -params.delta)
    a, b = 1.0 + 0.0j, 0.0j
    t = 0.0
    flat_a, flat_b, flat_t = out_a.reshape(-1), out_b.reshape(-1), taus.reshape(-1)
    for idx in order.reshape(-1):
        target = float(flat_t[idx])
        span = target - t
        if span > 0:
            n = max(1, math.ceil(span / step))
            h = span / n
            for _ in range(n):
                a, b = _rk4_step(a, b, h, half_omega, c_rate)
            t = target
        flat_a[idx], flat_b[idx] = a, b
    return out_a, out_b


def amplitudes_ode_oracle(params: AtomDriveParams, tau: float, step: float) -> AmplitudePair:
    a, b = ode_trajectory(params, [float(tau)], step)
    return AmplitudePair(complex(a[0]), complex(b[0]), float(tau))


def populations(params: AtomDriveParams, tau):
    """``(|a|^2, |b|^2)``: ground and excited populations of the multiplicity."""
    a, b = amplitudes(params, tau)
    return np.abs(a) ** 2, np.abs(b) ** 2


def survival(params: AtomDriveParams, tau):
    """P(tau), the probability that no photon has been emitted after delay tau."""
    a_hat, b_hat, log_scale = scaled_amplitudes(params, tau)
    return (np.abs(a_hat) ** 2 + np.abs(b_hat) ** 2) * np.exp(2.0 * log_scale.real)


def delay_density(params: AtomDriveParams, tau):
    """K(tau) = 2 gamma |b|^2."""
    _, b_hat, log_scale = scaled_amplitudes(params, tau)
    return 2.0 * params.gamma * np.abs(b_hat) ** 2 * np.exp(2.0 * log_scale.real)


def delay_curve(params: AtomDriveParams, tau) -> dict:
    """K, P, lambda and Lambda on an array of delays.

    The hazard ``lambda = K / P`` and ``Lambda = -ln P`` are formed from the
    scaled amplitudes, so they stay finite where P itself underflows.
    """
    tau = np.asarray(tau, dtype=float)
    a_hat, b_hat, log_scale = scaled_amplitudes(params, tau)
    pa, pb = np.abs(a_hat) ** 2, np.abs(b_hat) ** 2
    norm = pa + pb
    log_pop = 2.0 * log_scale.real
    weight = np.exp(log_pop)
    return {
        "tau": tau,
        "K": 2.0 * params.gamma * pb * weight,
        "P": norm * weight,
        "lambda": 2.0 * params.gamma * pb / norm,
        "Lambda": 0.0 - (log_pop + np.log(norm)) + 0.0,
    }


def delay_eval(params: AtomDriveParams, tau: float) -> DelayPointEval:
    curve = delay_curve(params, float(tau))
    return DelayPointEval(
        tau=float(tau),
        survival_P=float(curve["P"]),
        density_K=float(curve["K"]),
        intensity_lambda=float(curve["lambda"]),
        cumulative_Lambda=float(curve["Lambda"]),
    )
