import math

import numpy as np
import pytest

from qho_measure import (
    ChainClosedForm,
    ChainConfig,
    InsufficientSamples,
    MeasurementScheme,
    ResonanceError,
    RunningStats,
    WavePacket,
    chain_step,
    density_before_nth,
    ks_critical_1pct,
    normality_statistic,
    run_chain,
    run_chain_jittered,
    run_ensemble,
    thinning_interval,
)
from conftest import REF_SIGMA_INF


class TestChainStep:
    def test_zero_noise(self):
        assert chain_step(2.0, 0.5, 1.3, 0.0) == 1.0

    def test_memoryless(self):
        assert chain_step(100.0, 0.0, 2.0, 1.5) == 3.0

    def test_linearity_in_noise(self):
        a = chain_step(1.0, 0.3, 0.7, 2.0)
        b = chain_step(1.0, 0.3, 0.7, 0.0)
        assert abs((a - b) - 0.7 * 2.0) < 1e-15


class TestRunChain:
    def test_deterministic_repeat(self, ref_config):
        r1, s1 = run_chain(ref_config(n=500, seed=7))
        r2, s2 = run_chain(ref_config(n=500, seed=7))
        assert np.array_equal(r1.samples, r2.samples)
        assert s1.count == s2.count and s1.mean == s2.mean

    def test_seed_changes_samples(self, ref_config):
        r1, _ = run_chain(ref_config(n=500, seed=7))
        r2, _ = run_chain(ref_config(n=500, seed=8))
        assert not np.array_equal(r1.samples, r2.samples)

    def test_stats_match_samples(self, ref_config):
        record, stats = run_chain(ref_config(n=2000, seed=3))
        assert stats.count == 2000
        assert abs(stats.mean - np.mean(record.samples)) < 1e-12
        assert abs(stats.std - np.std(record.samples)) < 1e-12

    def test_marginals_match_closed_form(self, ref_params, ref_scheme, ref_packet):
        # std of the i-th sample over many independent chains must follow
        # the closed-form per-measurement density
        n_chains, length = 4000, 10
        cols = np.empty((n_chains, length))
        for j in range(n_chains):
            cfg = ChainConfig(ref_params, ref_scheme, ref_packet, length, seed=50_000 + j)
            record, _ = run_chain(cfg)
            cols[j] = record.samples
        cf = ChainClosedForm.from_setup(ref_params, ref_scheme, ref_packet)
        for i in (1, 2, 3, 10):
            target = density_before_nth(cf, i).std
            observed = float(np.std(cols[:, i - 1]))
            se = target / math.sqrt(2 * n_chains)
            assert abs(observed - target) < 4 * se

    def test_first_sample_tracks_initial_offset(self, ref_params, ref_scheme):
        # x_1 ~ N(x0 rho, sigma_first): check the mean over many chains
        packet = WavePacket(x0=3.0, sigma_x0=0.4)
        cf = ChainClosedForm.from_setup(ref_params, ref_scheme, packet)
        firsts = []
        for j in range(2000):
            cfg = ChainConfig(ref_params, ref_scheme, packet, 1, seed=90_000 + j)
            record, _ = run_chain(cfg)
            firsts.append(record.samples[0])
        se = cf.sigma_first / math.sqrt(2000)
        assert abs(np.mean(firsts) - 3.0 * cf.rho) < 4 * se

    def test_resonance_raises(self, ref_params, ref_packet):
        scheme = MeasurementScheme(t_M=0.5 * ref_params.period, sigma_M=0.5)
        cfg = ChainConfig(ref_params, scheme, ref_packet, 100, seed=1)
        with pytest.raises(ResonanceError):
            run_chain(cfg)

    def test_long_run_hits_limit(self, ref_config):
        record, _ = run_chain(ref_config(n=500_000, seed=11))
        assert abs(np.std(record.samples) / REF_SIGMA_INF - 1.0) < 0.01


class TestRunChainJittered:
    def test_zero_jitter_identical(self, ref_config):
        r0, _ = run_chain(ref_config(n=300, seed=5))
        rj, _ = run_chain_jittered(ref_config(n=300, seed=5, jitter_std=0.0))
        assert np.array_equal(r0.samples, rj.samples)

    def test_records_effective_periods(self, ref_config, ref_scheme):
        jitter = 0.05 * ref_scheme.t_M
        record, _ = run_chain_jittered(ref_config(n=500, seed=5, jitter_std=jitter))
        assert record.periods is not None and len(record.periods) == 500
        assert np.all(record.periods > 0)
        se = jitter / math.sqrt(500)
        assert abs(np.mean(record.periods) - ref_scheme.t_M) < 4 * se

    def test_jitter_regularizes_resonance(self, ref_params, ref_packet):
        # exactly resonant mean period, but jitter keeps each step off
        # resonance and the chain finite
        t_half = 0.5 * ref_params.period
        scheme = MeasurementScheme(t_M=t_half, sigma_M=0.5, jitter_std=0.02 * t_half)
        cfg = ChainConfig(ref_params, scheme, ref_packet, 5000, seed=2)
        record, _ = run_chain_jittered(cfg)
        assert np.all(np.isfinite(record.samples))


class TestRunningStats:
    def test_push_matches_numpy(self, rng):
        xs = rng.normal(0.0, 2.0, size=1000)
        st = RunningStats.for_scale(2.0)
        for x in xs:
            st.push(float(x))
        assert st.count == 1000
        assert abs(st.mean - np.mean(xs)) < 1e-12
        assert abs(st.variance - np.var(xs)) < 1e-12

    def test_push_array_matches_push(self, rng):
        xs = rng.normal(0.0, 1.0, size=500)
        a = RunningStats.for_scale(1.0)
        b = RunningStats.for_scale(1.0)
        a.push_array(xs)
        for x in xs:
            b.push(float(x))
        assert a.count == b.count
        assert abs(a.mean - b.mean) < 1e-12
        assert abs(a.variance - b.variance) < 1e-12
        assert np.array_equal(a.counts, b.counts)

    def test_merge_associative_and_exact(self, rng):
        xs = rng.normal(1.0, 3.0, size=900)
        parts = np.split(xs, 3)
        stats = []
        for p in parts:
            st = RunningStats.for_scale(3.0)
            st.push_array(p)
            stats.append(st)
        left = stats[0].merge(stats[1]).merge(stats[2])
        right = stats[0].merge(stats[1].merge(stats[2]))
        whole = RunningStats.for_scale(3.0)
        whole.push_array(xs)
        for m in (left, right):
            assert m.count == 900
            assert abs(m.mean - whole.mean) < 1e-12
            assert abs(m.variance - whole.variance) < 1e-12
            assert np.array_equal(m.counts, whole.counts)

    def test_histogram_conserves_count(self, rng):
        st = RunningStats.for_scale(1.0)
        xs = rng.normal(0.0, 5.0, size=2000)  # many land in overflow bins
        st.push_array(xs)
        assert int(np.sum(st.counts)) == 2000
        assert st.counts[0] > 0 and st.counts[-1] > 0


class TestRunEnsemble:
    def test_pooled_count(self, ref_config):
        stats = run_ensemble(ref_config(n=400, seed=9), n_chains=8)
        assert stats.count == 3200

    def test_single_chain_differs_from_run_chain_seed_path(self, ref_config):
        # ensemble splits the seed, so chain 0 need not equal run_chain,
        # but the pooled std must still be near the limit
        stats = run_ensemble(ref_config(n=20_000, seed=9), n_chains=4)
        assert abs(stats.std / REF_SIGMA_INF - 1.0) < 0.02

    def test_deterministic(self, ref_config):
        a = run_ensemble(ref_config(n=300, seed=4), n_chains=3)
        b = run_ensemble(ref_config(n=300, seed=4), n_chains=3)
        assert a.count == b.count and a.mean == b.mean and a.variance == b.variance


class TestNormality:
    def test_gaussian_accepted(self, rng):
        rejections = 0
        for _ in range(100):
            xs = rng.normal(0.0, 1.5, size=1000)
            if normality_statistic(xs, 1.5) > ks_critical_1pct(1000):
                rejections += 1
        assert rejections <= 3  # 1 percent level, allow slack

    def test_uniform_rejected(self, rng):
        xs = rng.uniform(-2.0, 2.0, size=1000)
        assert normality_statistic(xs, 4.0 / math.sqrt(12.0)) > ks_critical_1pct(1000)

    def test_wrong_scale_rejected(self, rng):
        xs = rng.normal(0.0, 2.0, size=5000)
        assert normality_statistic(xs, 1.0) > ks_critical_1pct(5000)

    def test_too_few_samples(self):
        with pytest.raises(InsufficientSamples):
            normality_statistic(np.zeros(50), 1.0)

    def test_critical_value(self):
        assert abs(ks_critical_1pct(10_000) - 0.0163) < 1e-15


class TestThinning:
    def test_reference_rho(self):
        # cos(2 pi / 5) = 0.309..., cube is below 0.05
        assert thinning_interval(0.30901699437494745) == 3

    def test_memoryless(self):
        assert thinning_interval(0.0) == 1

    def test_threshold_property(self):
        for rho in (0.1, 0.3, 0.7, 0.95):
            k = thinning_interval(rho)
            assert rho**k < 0.05
            assert k == 1 or rho ** (k - 1) >= 0.05
