"""Monte Carlo simulation of the single-system measurement record.

Because every post-collapse state is Gaussian, the outcome sequence is an
exact linear Gaussian chain:

    x_1 = x0 * rho + sigma_first * eta_1
    x_i = x_{i-1} * rho + sigma_step * eta_i      (i >= 2)

with iid standard-normal eta. No discretization is involved; the grid
oracle exists to cross-check this construction, not the other way round.

RNG policy: PCG64 seeded through numpy SeedSequence; standard normals are
produced by the inverse-CDF transform on uniforms so every sample consumes
exactly one draw (no rejection loops in the record path). Ensembles split
the seed with SeedSequence.spawn.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter
from scipy.special import ndtr, ndtri

from .chain_analytics import (
    EPS_RES,
    ChainClosedForm,
    MeasurementScheme,
    limiting_sigma,
)
from .errors import InsufficientSamples, ResonanceError
from .gaussian_core import OscillatorParams, WavePacket, evolved_width

# Floor on jittered evolution times, as a fraction of the nominal period.
T_MIN_FRACTION = 1e-6

HIST_BINS = 200
HIST_HALF_WIDTH_SIGMAS = 6.0


@dataclass(frozen=True)
class ChainConfig:
    params: OscillatorParams
    scheme: MeasurementScheme
    initial: WavePacket
    n_measurements: int
    seed: int

    def __post_init__(self):
        if self.n_measurements < 1:
            raise ValueError("n_measurements must be >= 1")


@dataclass(frozen=True)
class MeasurementRecord:
    """Ordered measurement outcomes; effective periods when jitter is active."""

    samples: np.ndarray
    periods: np.ndarray | None = None


@dataclass
class RunningStats:
    """Streaming count/mean/variance (Welford/Chan) plus a fixed-bin histogram.

    Histogram counts have two overflow slots: counts[0] below edges[0],
    counts[-1] at or above edges[-1].
    """

    edges: np.ndarray
    count: int = 0
    mean: float = 0.0
    _m2: float = 0.0
    counts: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.counts is None:
            self.counts = np.zeros(len(self.edges) + 1, dtype=np.int64)

    @classmethod
    def for_scale(cls, sigma_ref: float) -> "RunningStats":
        """Uniform bins over +-HIST_HALF_WIDTH_SIGMAS * sigma_ref."""
        half = HIST_HALF_WIDTH_SIGMAS * sigma_ref
        return cls(edges=np.linspace(-half, half, HIST_BINS + 1))

    @property
    def variance(self) -> float:
        if self.count < 2:
            return 0.0
        return self._m2 / self.count

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def push(self, x: float) -> None:
        self.push_array(np.asarray([x], dtype=float))

    def push_array(self, xs: np.ndarray) -> None:
        xs = np.asarray(xs, dtype=float)
        nb = xs.size
        if nb == 0:
            return
        mb = float(xs.mean())
        m2b = float(((xs - mb) ** 2).sum())
        self._merge_moments(nb, mb, m2b)
        inner, _ = np.histogram(xs, bins=self.edges)
        self.counts[1:-1] += inner
        self.counts[0] += int((xs < self.edges[0]).sum())
        self.counts[-1] += int((xs >= self.edges[-1]).sum())

    def _merge_moments(self, nb: int, mb: float, m2b: float) -> None:
        na = self.count
        n = na + nb
        delta = mb - self.mean
        self.mean += delta * nb / n
        self._m2 += m2b + delta * delta * na * nb / n
        self.count = n

    def merge(self, other: "RunningStats") -> "RunningStats":
        """Combine two stats accumulated over identical bin edges."""
        if not np.array_equal(self.edges, other.edges):
            raise ValueError("cannot merge histograms with different bin edges")
        out = RunningStats(
            edges=self.edges,
            count=self.count,
            mean=self.mean,
            _m2=self._m2,
            counts=self.counts.copy(),
        )
        if other.count:
            out._merge_moments(other.count, other.mean, other._m2)
        out.counts += other.counts
        return out


def chain_step(x_prev: float, rho: float, sigma_step: float, noise: float) -> float:
    """One exact draw from the evolved post-collapse density."""
    return x_prev * rho + sigma_step * noise


def _standard_normal(rng: np.random.Generator, n: int) -> np.ndarray:
    """Inverse-CDF normals: one uniform per sample, fully deterministic."""
    u = rng.random(n)
    np.maximum(u, 1e-300, out=u)  # ndtri(0) is -inf
    return ndtri(u)


def _histogram_scale(cf: ChainClosedForm, params: OscillatorParams) -> float:
    if cf.sin_abs > EPS_RES:
        return limiting_sigma(cf)
    # resonant chain has no limiting width; use a generous fallback
    return 10.0 * max(cf.sigma_first, cf.sigma_step, params.sigma_gs)


def _run_chain_seeded(cfg: ChainConfig, seed_seq: np.random.SeedSequence):
    cf = ChainClosedForm.from_setup(cfg.params, cfg.scheme, cfg.initial)
    if cf.sin_abs <= EPS_RES:
        raise ResonanceError(
            f"t_M = {cfg.scheme.t_M} resonant: chain variance diverges without jitter"
        )
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    n = cfg.n_measurements
    eta = _standard_normal(rng, n)
    x = np.empty(n)
    x[0] = cfg.initial.x0 * cf.rho + cf.sigma_first * eta[0]
    if n > 1:
        x[1:], _ = lfilter(
            [1.0], [1.0, -cf.rho], cf.sigma_step * eta[1:], zi=np.array([cf.rho * x[0]])
        )
    stats = RunningStats.for_scale(limiting_sigma(cf))
    stats.push_array(x)
    return MeasurementRecord(samples=x), stats


def run_chain(cfg: ChainConfig) -> tuple[MeasurementRecord, RunningStats]:
    """Simulate the exact measurement chain; deterministic given cfg.seed."""
    return _run_chain_seeded(cfg, np.random.SeedSequence(cfg.seed))


def _run_chain_jittered_seeded(cfg: ChainConfig, seed_seq: np.random.SeedSequence):
    if cfg.scheme.jitter_std == 0.0:
        return _run_chain_seeded(cfg, seed_seq)
    params, scheme = cfg.params, cfg.scheme
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    n = cfg.n_measurements
    t_min = T_MIN_FRACTION * scheme.t_M
    periods = np.maximum(t_min, scheme.t_M + scheme.jitter_std * _standard_normal(rng, n))
    eta = _standard_normal(rng, n)
    rho_i = np.cos(params.omega * periods)
    sigma_i = evolved_width(params, scheme.sigma_M, periods)
    x = np.empty(n)
    x[0] = cfg.initial.x0 * rho_i[0] + evolved_width(params, cfg.initial.sigma_x0, periods[0]) * eta[0]
    for i in range(1, n):
        x[i] = x[i - 1] * rho_i[i] + sigma_i[i] * eta[i]
    cf = ChainClosedForm.from_setup(params, scheme, cfg.initial)
    stats = RunningStats.for_scale(_histogram_scale(cf, params))
    stats.push_array(x)
    return MeasurementRecord(samples=x, periods=periods), stats


def run_chain_jittered(cfg: ChainConfig) -> tuple[MeasurementRecord, RunningStats]:
    """Chain with Gaussian noise on the measurement period.

    Each step evolves for t_i = max(t_min, t_M + jitter_std * eta), with the
    memory coefficient and step width recomputed for t_i. With jitter_std = 0
    this is exactly run_chain.
    """
    return _run_chain_jittered_seeded(cfg, np.random.SeedSequence(cfg.seed))


def run_ensemble(cfg: ChainConfig, n_chains: int) -> RunningStats:
    """Pooled statistics of n_chains independent chains.

    Per-chain RNG streams come from SeedSequence(cfg.seed).spawn; the merge
    of count/mean/variance is exact.
    """
    if n_chains < 1:
        raise ValueError("n_chains must be >= 1")
    children = np.random.SeedSequence(cfg.seed).spawn(n_chains)
    runner = _run_chain_jittered_seeded if cfg.scheme.jitter_std > 0 else _run_chain_seeded
    pooled = None
    for child in children:
        _, stats = runner(cfg, child)
        pooled = stats if pooled is None else pooled.merge(stats)
    return pooled


def thinning_interval(rho: float, threshold: float = 0.05) -> int:
    """Smallest k with |rho|^k < threshold; 1 for a memoryless chain."""
    r = abs(rho)
    if r >= 1.0:
        raise ValueError("|rho| must be < 1 to thin to independence")
    if r == 0.0 or r**1 < threshold:
        return 1
    k = math.ceil(math.log(threshold) / math.log(r))
    while r**k >= threshold:  # guard rounding at the boundary
        k += 1
    return k


def ks_critical_1pct(n: int) -> float:
    """One-sample KS critical value at the 1% level (asymptotic)."""
    return 1.63 / math.sqrt(n)


def normality_statistic(samples: np.ndarray, sigma_target: float) -> float:
    """Kolmogorov-Smirnov D of the samples against N(0, sigma_target^2).

    Callers are responsible for thinning correlated chain output first
    (see thinning_interval); KS on correlated samples is not valid.
    """
    xs = np.sort(np.asarray(samples, dtype=float))
    n = xs.size
    if n < 100:
        raise InsufficientSamples(f"need >= 100 samples for KS, got {n}")
    cdf = ndtr(xs / sigma_target)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - cdf)
    d_minus = np.max(cdf - (i - 1) / n)
    return float(max(d_plus, d_minus))
