"""Self-check suite: analytic identities and oracle equivalences.

Each check returns the measured error and its tolerance.  ``fault`` names a
check whose implementation-side value is perturbed by a relative 5%, so
the harness itself can be tested.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate

from . import correlation, dynamics, laplace, montecarlo
from .params import AtomDriveParams

FAULT_SIZE = 5e-2

ROOT2 = math.sqrt(2.0)
GRID = [
    AtomDriveParams(1.0, w, d)
    for w in (0.5, 1.0, ROOT2, 2.2, 5.0)
    for d in (0.0, 1.0, -1.0, -2.2, 3.0)
]
REFERENCE_SETS = [
    AtomDriveParams(1.0, ROOT2, 0.0),
    AtomDriveParams(1.0, ROOT2 / 2, 0.0),
    AtomDriveParams(1.0, 2 * ROOT2, 0.0),
    AtomDriveParams(1.0, 2.2, 0.0),
    AtomDriveParams(1.0, 4.4, 0.0),
    AtomDriveParams(1.0, 2.8, -2.2),
    AtomDriveParams(1.0, 4.4, -3.4),
]
S_POINTS = [0.3, 1.0, 2.0 + 1.0j, 0.5 - 2.0j, 4.0]


@dataclass
class CheckResult:
    name: str
    error: float
    tolerance: float
    passed: bool
    seconds: float


def _scale(name, fault):
    return 1.0 + FAULT_SIZE if fault == name else 1.0


def check_k_normalization(f):
    return max(abs(f * laplace.laplace_K(p, 0.0) - 1.0) for p in GRID), 1e-12


def check_intensity_delay_product(f):
    return max(abs(f * correlation.mean_intensity(p) * laplace.delay_moments(p).mean_delay - 1.0) for p in GRID), 1e-12


def check_zero_frequency_q(f):
    return max(abs(f * correlation.noise_spectrum(p, 0.0)[0] - laplace.mandel_q(p)) for p in GRID), 1e-12


def check_geometric_series(f):
    err = 0.0
    for p in GRID:
        for s in S_POINTS:
            k = laplace.laplace_K(p, s)
            ref = k / (1 - k)
            err = max(err, abs(f * correlation.laplace_J(p, s) - ref) / abs(ref))
    return err, 1e-12


def check_optimal_q(f):
    return abs(f * laplace.mandel_q(AtomDriveParams(1.0, ROOT2, 0.0)) + 0.75), 1e-12


def check_k_integral(f):
    err = 0.0
    for p in REFERENCE_SETS[:3]:
        val, _ = integrate.quad(lambda t: float(dynamics.delay_density(p, t)), 0, 80, limit=400, epsabs=1e-13)
        err = max(err, abs(f * val - 1.0))
    return err, 1e-9


def check_amplitudes_vs_ode(f):
    taus = np.linspace(0.0, 10.0, 41)
    err = 0.0
    for p in (REFERENCE_SETS[0], REFERENCE_SETS[5]):
        a, b = dynamics.amplitudes(p, taus)
        oa, ob = dynamics.ode_trajectory(p, taus, 1e-3)
        err = max(err, np.max(np.abs(f * a - oa)), np.max(np.abs(f * b - ob)))
    return float(err), 1e-8


def check_laplace_vs_quadrature(f):
    err = 0.0
    for p, s in [(REFERENCE_SETS[0], 1.0), (REFERENCE_SETS[2], 1.0j), (REFERENCE_SETS[5], 0.5 + 2.0j)]:
        err = max(err, abs(f * laplace.laplace_K(p, s) - laplace.laplace_K_numeric_oracle(p, s)))
    return err, 1e-8


def check_moments_vs_logderivative(f):
    err = 0.0
    for p in GRID:
        m, o = laplace.delay_moments(p), laplace.moments_from_logderivative_oracle(p)
        err = max(err, abs(f * m.mean_delay / o.mean_delay - 1), abs(f * m.delay_variance / o.delay_variance - 1))
    return err, 1e-6


def check_poles_reconstruct(f):
    err = 0.0
    for p in REFERENCE_SETS:
        pd = correlation.pole_decomposition(p)
        for s in S_POINTS:
            ref = correlation.laplace_J(p, s)
            err = max(err, abs(f * pd.laplace_j(s) - ref) / abs(ref))
    return float(err), 1e-9


def check_poles_vs_convolution(f):
    p = REFERENCE_SETS[0]
    t = np.arange(4001) * 1e-3
    oracle = correlation.j_convolution_oracle(p, t, 12).values
    poles = f * correlation.j_of_t(p, t) * correlation.mean_intensity(p)
    return float(np.max(np.abs(poles - oracle))), 1e-4


def check_resonant_closed_form(f):
    t = np.linspace(0.0, 5.0, 201)
    err = 0.0
    for p in REFERENCE_SETS[3:5]:
        err = max(err, np.max(np.abs(f * correlation.j_of_t(p, t) - correlation.j_resonant(p, t))))
    return float(err), 1e-10


def check_perturbative_limit(f):
    t = np.linspace(0.0, 10.0, 1001)
    err = 0.0
    for d in (0.0, 2.0):
        p = AtomDriveParams(1.0, 0.01, d)
        err = max(err, np.max(np.abs(f * correlation.j_of_t(p, t) - correlation.j_perturbative(p, t))))
    return float(err), 1e-4


def check_spectrum_high_frequency(f):
    q, _ = correlation.noise_spectrum(REFERENCE_SETS[0], 100.0)
    return abs(f * (1.0 + q) - 1.0), 1e-3


def check_sampler_inverse(f):
    p = REFERENCE_SETS[0]
    u = montecarlo.uniform_variates(12345, 0, 1000)
    tau = montecarlo.sample_delays(p, u)
    return float(np.max(np.abs(f * dynamics.survival(p, tau) - u))), 1e-10


def check_monte_carlo_mean_delay(f):
    # measured in standard errors; passes below 3 sigma
    p = REFERENCE_SETS[0]
    summary = montecarlo.delay_summary(montecarlo.generate_stream(p, 20_000, 2024))
    tau_mean = laplace.delay_moments(p).mean_delay
    return abs(f * summary.mean - tau_mean) / summary.mean_standard_error, 3.0


CHECKS = {
    "k_normalization": check_k_normalization,
    "intensity_delay_product": check_intensity_delay_product,
    "zero_frequency_q": check_zero_frequency_q,
    "geometric_series": check_geometric_series,
    "optimal_q": check_optimal_q,
    "k_integral": check_k_integral,
    "amplitudes_vs_ode": check_amplitudes_vs_ode,
    "laplace_vs_quadrature": check_laplace_vs_quadrature,
    "moments_vs_logderivative": check_moments_vs_logderivative,
    "poles_reconstruct_laplace": check_poles_reconstruct,
    "poles_vs_convolution": check_poles_vs_convolution,
    "resonant_closed_form": check_resonant_closed_form,
    "perturbative_limit": check_perturbative_limit,
    "spectrum_high_frequency": check_spectrum_high_frequency,
    "sampler_inverse": check_sampler_inverse,
    "monte_carlo_mean_delay": check_monte_carlo_mean_delay,
}


def run_checks(fault: str | None = None, only=None) -> list[CheckResult]:
    if fault is not None and fault not in CHECKS:
        raise KeyError(fault)
    results = []
    for name, fn in CHECKS.items():
        if only and name not in only:
            continue
        start = time.perf_counter()
        err, tol = fn(_scale(name, fault))
        err = float(err)
        results.append(CheckResult(name, err, tol, bool(err <= tol), time.perf_counter() - start))
    return results


def report(results) -> dict:
    return {"passed": all(r.passed for r in results), "checks": [asdict(r) for r in results]}
