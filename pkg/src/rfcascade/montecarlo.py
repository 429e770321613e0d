"""Photon emission streams drawn by inverse-CDF sampling, and their estimators.

Random numbers come from the Philox4x64-10 counter-based generator keyed by
the 64-bit seed.  Raw output number ``k`` (counting from 0) is turned into
the uniform variate of delay ``k + 1`` by ``((raw >> 11) + 0.5) * 2**-53``,
so variates lie strictly inside (0, 1) and any index range of a stream can
be generated independently of the others.

Estimators are folds into small accumulator objects whose ``merge`` is exact
(integer or rational arithmetic), hence associative and order-insensitive.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numpy.random import Philox
from scipy import stats

from . import correlation, dynamics, laplace
from .correlation import CorrelationCurve
from .laplace import CountingStats
from .params import AtomDriveParams, ConvergenceError, ParameterError

GENERATOR_NAME = "philox4x64-10/v1"
SEED_LIMIT = 2**64
SAMPLE_TOL = 1e-12
MAX_ITERATIONS = 200
MIN_WINDOWS = 50


# -- random variates


def _check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ParameterError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed < SEED_LIMIT:
        raise ParameterError(f"seed must be in [0, 2**64), got {seed!r}")
    return seed


def uniform_variates(seed: int, start: int, count: int) -> np.ndarray:
    """Variates ``start .. start + count - 1`` of the stream keyed by ``seed``."""
    seed = _check_seed(seed)
    if start < 0 or count < 0:
        raise ParameterError("start and count must be >= 0")
    bitgen = Philox(key=seed)
    # each counter increment yields 4 outputs
    bitgen.advance(start // 4)
    skip = start % 4
    raw = bitgen.random_raw(count + skip)[skip:]
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


# -- inverse-CDF sampling


def _survival_and_density(params, tau):
    a_hat, b_hat, log_scale = dynamics.scaled_amplitudes(params, tau)
    w = np.exp(2.0 * log_scale.real)
    pb = np.abs(b_hat) ** 2
    return (np.abs(a_hat) ** 2 + pb) * w, 2.0 * params.gamma * pb * w


def sample_delays(params: AtomDriveParams, u) -> np.ndarray:
    """Solve ``P(tau) = u`` for each variate, vectorised.

    The upper bracket doubles from the mean delay until ``P < u``; then
    Newton steps (``P' = -K``) are taken whenever they stay inside the
    bracket, bisection otherwise.  Stops at ``|P - u| < SAMPLE_TOL`` or when
    the bracket has shrunk to a few ulps.
    """
    params.require_drive()
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0.0) & (u < 1.0))):
        raise ParameterError("uniform variates must lie strictly inside (0, 1)")
    shape = u.shape
    u = u.reshape(-1)
    tau_mean = laplace.delay_moments(params).mean_delay

    hi = np.full(u.shape, tau_mean)
    for _ in range(2000):
        p_hi = dynamics.survival(params, hi)
        grow = p_hi >= u
        if not np.any(grow):
            break
        hi[grow] *= 2.0
    else:
        raise ConvergenceError("could not bracket the delay")
    lo = np.zeros(u.shape)
    # exponential-law first guess, clipped into the bracket
    tau = np.clip(-tau_mean * np.log(u), 0.25 * hi, 0.75 * hi)
    tau = np.where(tau > 0, tau, 0.5 * hi)

    active = np.arange(u.size)
    for _ in range(MAX_ITERATIONS):
        t_a = tau[active]
        p, k = _survival_and_density(params, t_a)
        f = p - u[active]
        done = (np.abs(f) < SAMPLE_TOL) | (hi[active] - lo[active] <= 4 * np.spacing(np.maximum(hi[active], 1e-300)))
        lo[active] = np.where(f > 0, t_a, lo[active])
        hi[active] = np.where(f > 0, hi[active], t_a)
        active, f, k, t_a = active[~done], f[~done], k[~done], t_a[~done]
        if active.size == 0:
            return tau.reshape(shape)
        lo_a, hi_a = lo[active], hi[active]
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = t_a + f / k
        ok = (k > 0) & (newton > lo_a) & (newton < hi_a)
        tau[active] = np.where(ok, newton, 0.5 * (lo_a + hi_a))
    raise ConvergenceError(f"inverse-CDF sampling did not converge in {MAX_ITERATIONS} iterations")


def sample_delay(params: AtomDriveParams, u: float) -> float:
    """The delay ``tau`` with survival probability ``P(tau) = u``."""
    return float(sample_delays(params, np.array([u]))[0])


# -- streams


@dataclass(frozen=True)
class PhotonStream:
    """Emission times ``t_0 = 0 < t_1 < ...``, reproducible from ``(params, seed, len)``.

    ``process`` is ``"cascade"`` for the atom, ``"poisson"`` for the matched
    exponential-delay reference.
    """

    params: AtomDriveParams
    seed: int
    times: np.ndarray
    process: str = "cascade"

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        if times.ndim != 1 or times.size == 0:
            raise ParameterError("a stream holds at least the initial photon")
        if times[0] != 0.0:
            raise ParameterError("streams start with a photon at t = 0")
        if np.any(np.diff(times) <= 0):
            raise ParameterError("emission times must be strictly increasing")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)

    @property
    def n_photons(self) -> int:
        return int(self.times.size)

    @property
    def span(self) -> float:
        return float(self.times[-1])

    @property
    def delays(self) -> np.ndarray:
        return np.diff(self.times)


def generate_delays(params: AtomDriveParams, seed: int, start: int, count: int) -> np.ndarray:
    """Delays ``start + 1 .. start + count`` of the stream keyed by ``seed``."""
    return sample_delays(params, uniform_variates(seed, start, count))


def _times_from_delays(delays):
    times = np.empty(delays.size + 1)
    times[0] = 0.0
    np.cumsum(delays, out=times[1:])
    return times


def generate_stream(params: AtomDriveParams, n_photons: int, seed: int) -> PhotonStream:
    """Draw a stream of ``n_photons`` emission times (``n_photons - 1`` delays)."""
    if n_photons < 1:
        raise ParameterError(f"n_photons must be >= 1, got {n_photons!r}")
    params.require_drive()
    delays = generate_delays(params, seed, 0, n_photons - 1)
    return PhotonStream(params, _check_seed(seed), _times_from_delays(delays))


def generate_stream_parallel(params: AtomDriveParams, n_photons: int, seed: int,
                             chunk: int = 50_000, workers: int | None = None) -> PhotonStream:
    """Same stream as :func:`generate_stream`, drawn in disjoint index chunks concurrently."""
    if n_photons < 1:
        raise ParameterError(f"n_photons must be >= 1, got {n_photons!r}")
    if chunk < 1:
        raise ParameterError("chunk must be >= 1")
    params.require_drive()
    n = n_photons - 1
    starts = range(0, n, chunk)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda s: generate_delays(params, seed, s, min(chunk, n - s)), starts))
    delays = np.concatenate(parts) if parts else np.empty(0)
    return PhotonStream(params, _check_seed(seed), _times_from_delays(delays))


def poisson_reference_stream(params: AtomDriveParams, n_photons: int, seed: int) -> PhotonStream:
    """Exponential-delay renewal stream with the same mean delay as the atom."""
    if n_photons < 1:
        raise ParameterError(f"n_photons must be >= 1, got {n_photons!r}")
    tau_mean = laplace.delay_moments(params).mean_delay
    delays = -tau_mean * np.log(uniform_variates(seed, 0, n_photons - 1))
    return PhotonStream(params, _check_seed(seed), _times_from_delays(delays), process="poisson")


# -- exact accumulation helpers


def _exact_sums(x: np.ndarray) -> tuple[Fraction, Fraction]:
    """Exact sum and sum of squares of float64 values."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return Fraction(0), Fraction(0)
    mant, expo = np.frexp(x)
    mant = (mant * 2.0**53).astype(np.int64).tolist()
    expo = (expo.astype(np.int64) - 53).tolist()
    emin = min(expo)
    total = 0
    total_sq = 0
    for m, e in zip(mant, expo):
        shift = e - emin
        total += m << shift
        total_sq += (m * m) << (2 * shift)
    return Fraction(total, 1) * Fraction(2) ** emin, Fraction(total_sq, 1) * Fraction(2) ** (2 * emin)


@dataclass(frozen=True)
class DelayAccumulator:
    """Exact count, sum and sum of squares of delays."""

    count: int = 0
    total: Fraction = Fraction(0)
    total_sq: Fraction = Fraction(0)

    @classmethod
    def from_delays(cls, delays) -> "DelayAccumulator":
        delays = np.asarray(delays, dtype=float)
        s, s2 = _exact_sums(delays)
        return cls(int(delays.size), s, s2)

    def merge(self, other: "DelayAccumulator") -> "DelayAccumulator":
        return DelayAccumulator(self.count + other.count, self.total + other.total, self.total_sq + other.total_sq)

    @property
    def mean(self) -> float:
        return float(self.total / self.count)

    @property
    def variance(self) -> float:
        # unbiased
        n = self.count
        return float((self.total_sq - self.total * self.total / n) / (n - 1))


@dataclass(frozen=True)
class DelaySummary:
    n_delays: int
    mean: float
    variance: float
    mean_standard_error: float
    variance_standard_error: float

    @property
    def q_from_delays(self) -> float:
        return self.variance / self.mean**2 - 1.0


def delay_summary(stream: PhotonStream) -> DelaySummary:
    d = stream.delays
    if d.size < 2:
        raise ParameterError("need at least two delays")
    acc = DelayAccumulator.from_delays(d)
    mean, var = acc.mean, acc.variance
    m4 = float(np.mean((d - mean) ** 4))
    return DelaySummary(
        n_delays=acc.count,
        mean=mean,
        variance=var,
        mean_standard_error=math.sqrt(var / acc.count),
        variance_standard_error=math.sqrt(max(m4 - var * var, 0.0) / acc.count),
    )


# -- delay histogram


@dataclass(frozen=True)
class DelayHistogram:
    """Histogram of consecutive delays with the analytic mass of each bin.

    ``overflow`` counts delays beyond the last edge; ``overflow_probability``
    is the analytic mass of that tail.
    """

    edges: np.ndarray
    counts: np.ndarray
    total: int
    expected_probabilities: np.ndarray
    overflow: int = 0
    overflow_probability: float = 0.0

    @property
    def n_delays(self) -> int:
        return self.total + self.overflow

    def merge(self, other: "DelayHistogram") -> "DelayHistogram":
        if not np.array_equal(self.edges, other.edges):
            raise ParameterError("cannot merge histograms with different bins")
        return DelayHistogram(self.edges, self.counts + other.counts, self.total + other.total,
                              self.expected_probabilities, self.overflow + other.overflow,
                              self.overflow_probability)

    def chi_square(self, min_expected: float = 5.0):
        """Pearson goodness of fit; bins with expected count below ``min_expected`` are merged.

        Returns ``(statistic, dof, p_value)``.
        """
        n = self.n_delays
        obs = np.append(self.counts, self.overflow).astype(float)
        exp = n * np.append(self.expected_probabilities, self.overflow_probability)
        g_obs, g_exp = [], []
        acc_o = acc_e = 0.0
        for o, e in zip(obs, exp):
            acc_o += o
            acc_e += e
            if acc_e >= min_expected:
                g_obs.append(acc_o)
                g_exp.append(acc_e)
                acc_o = acc_e = 0.0
        if acc_e > 0 or acc_o > 0:
            if g_exp:
                g_obs[-1] += acc_o
                g_exp[-1] += acc_e
            else:
                g_obs.append(acc_o)
                g_exp.append(acc_e)
        g_obs, g_exp = np.array(g_obs), np.array(g_exp)
        stat = float(np.sum((g_obs - g_exp) ** 2 / g_exp))
        dof = len(g_obs) - 1
        if dof < 1:
            raise ParameterError("too few populated bins for a chi-square test")
        return stat, dof, float(stats.chi2.sf(stat, dof))


def empirical_delay_histogram(stream: PhotonStream, bin_width: float, max_delay: float) -> DelayHistogram:
    if not bin_width > 0:
        raise ParameterError(f"bin_width must be > 0, got {bin_width!r}")
    if not max_delay > 0:
        raise ParameterError(f"max_delay must be > 0, got {max_delay!r}")
    n_bins = max(1, int(round(max_delay / bin_width)))
    edges = bin_width * np.arange(n_bins + 1)
    d = stream.delays
    counts, _ = np.histogram(d, bins=edges)
    overflow = int(np.count_nonzero(d >= edges[-1]))
    if stream.process == "poisson":
        surv = np.exp(-edges / laplace.delay_moments(stream.params).mean_delay)
    else:
        surv = dynamics.survival(stream.params, edges)
    return DelayHistogram(edges, counts.astype(np.int64), int(counts.sum()), surv[:-1] - surv[1:],
                          overflow, float(surv[-1]))


def ks_test(stream: PhotonStream):
    """Kolmogorov-Smirnov test of the delays against the CDF ``1 - P``."""
    params = stream.params
    return stats.kstest(stream.delays, lambda t: 1.0 - dynamics.survival(params, np.maximum(t, 0.0)))


# -- counting statistics


@dataclass(frozen=True)
class WindowCountAccumulator:
    window: float
    n_windows: int = 0
    total: int = 0
    total_sq: int = 0

    @classmethod
    def from_stream(cls, stream: PhotonStream, window: float) -> "WindowCountAccumulator":
        counts = window_counts(stream, window)
        c = counts.tolist()
        return cls(float(window), len(c), sum(c), sum(x * x for x in c))

    def merge(self, other: "WindowCountAccumulator") -> "WindowCountAccumulator":
        if self.window != other.window:
            raise ParameterError("cannot merge counts over different windows")
        return WindowCountAccumulator(self.window, self.n_windows + other.n_windows,
                                      self.total + other.total, self.total_sq + other.total_sq)

    def stats(self) -> CountingStats:
        n = self.n_windows
        if n < 2:
            raise ParameterError("need at least two windows")
        mean = Fraction(self.total, n)
        var = (self.total_sq - self.total * mean) / (n - 1)
        # Gaussian approximation: Var(s^2) = 2 sigma^4 / (n - 1)
        se = float(var / mean) * math.sqrt(2.0 / (n - 1))
        return CountingStats(float(self.window), float(mean), float(var), n_windows=n, q_standard_error=se)


def window_counts(stream: PhotonStream, window: float) -> np.ndarray:
    """Photon counts in the disjoint windows ``[k T, (k + 1) T)`` covering the stream."""
    if not window > 0:
        raise ParameterError(f"window must be > 0, got {window!r}")
    n_windows = int(math.floor(stream.span / window))
    if n_windows < 1:
        raise ParameterError(f"window {window!r} is longer than the stream span {stream.span!r}")
    edges = window * np.arange(n_windows + 1)
    return np.diff(np.searchsorted(stream.times, edges, side="left")).astype(np.int64)


def empirical_counting(stream: PhotonStream, window: float, bootstrap: int = 1000) -> CountingStats:
    """Sample mean and variance of window counts; Q-hat = variance / mean - 1.

    The standard error of Q-hat is a bootstrap over windows, seeded from the
    stream seed so it is reproducible.
    """
    counts = window_counts(stream, window)
    if counts.size < MIN_WINDOWS:
        raise ParameterError(f"only {counts.size} windows of length {window!r}; need >= {MIN_WINDOWS}")
    mean = float(counts.mean())
    var = float(counts.var(ddof=1))
    se = None
    if bootstrap:
        rng = np.random.Generator(Philox(key=stream.seed ^ 0x5EED))
        idx = rng.integers(0, counts.size, size=(bootstrap, counts.size))
        samples = counts[idx]
        q = samples.var(axis=1, ddof=1) / samples.mean(axis=1) - 1.0
        se = float(q.std(ddof=1))
    return CountingStats(float(window), mean, var, n_windows=int(counts.size), q_standard_error=se)


# -- pair correlation


@dataclass(frozen=True)
class PairCountAccumulator:
    """Histogram of pair separations from a set of start photons."""

    bin_width: float
    n_bins: int
    counts: np.ndarray
    n_start: int = 0
    n_delays: int = 0
    span: float = 0.0

    def merge(self, other: "PairCountAccumulator") -> "PairCountAccumulator":
        if (self.bin_width, self.n_bins) != (other.bin_width, other.n_bins):
            raise ParameterError("cannot merge pair histograms with different bins")
        return PairCountAccumulator(self.bin_width, self.n_bins, self.counts + other.counts,
                                    self.n_start + other.n_start, self.n_delays + other.n_delays,
                                    self.span + other.span)

    def curve(self) -> CorrelationCurve:
        rate = self.n_delays / self.span
        norm = self.n_start * self.bin_width * rate
        lags = self.bin_width * (np.arange(self.n_bins) + 0.5)
        return CorrelationCurve(
            lags=lags,
            values=self.counts / norm,
            kind="j",
            errors=np.sqrt(self.counts) / norm,
            even=True,
            meta={"mean_intensity_estimate": rate, "n_start": self.n_start, "bin_width": self.bin_width},
        )


def pair_counts(stream: PhotonStream, bin_width: float, max_lag: float) -> PairCountAccumulator:
    if not bin_width > 0 or not max_lag > 0:
        raise ParameterError("bin_width and max_lag must be > 0")
    if bin_width > max_lag:
        raise ParameterError(f"bin_width {bin_width!r} exceeds max_lag {max_lag!r}")
    if stream.n_photons < 2 or max_lag > stream.span / 10.0:
        raise ParameterError(f"max_lag {max_lag!r} exceeds a tenth of the stream span {stream.span!r}")
    n_bins = int(round(max_lag / bin_width))
    max_lag = n_bins * bin_width
    times = stream.times
    # start photons whose full lag range lies inside the stream
    n_start = int(np.searchsorted(times, times[-1] - max_lag, side="right"))
    counts = np.zeros(n_bins, dtype=np.int64)
    for k in range(1, times.size):
        upper = min(n_start, times.size - k)
        sep = times[k:k + upper] - times[:upper]
        inside = sep[sep < max_lag]
        if inside.size == 0:
            break
        idx = np.minimum((inside / bin_width).astype(np.int64), n_bins - 1)
        counts += np.bincount(idx, minlength=n_bins)
    return PairCountAccumulator(bin_width, n_bins, counts, n_start, times.size - 1, stream.span)


def empirical_correlation(stream: PhotonStream, bin_width: float, max_lag: float) -> CorrelationCurve:
    """Estimate ``j(t)`` from all ordered pair separations in ``(0, max_lag)``.

    Normalised by the number of start photons, the bin width and the
    stream's own mean rate.  Self-pairs (the Dirac term) never enter.
    """
    return pair_counts(stream, bin_width, max_lag).curve()
