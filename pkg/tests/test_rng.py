"""Counter-based SplitMix64 streams against a pure-Python reference."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from pbracket.rng import Streams, mix64, path_keys

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def ref_mix(z):
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK
    return z ^ (z >> 31)


def ref_uniforms(seed, path, n):
    key = ref_mix(ref_mix(seed & MASK) ^ path)
    return [(ref_mix((key + (k + 1) * GOLDEN) & MASK) >> 11) * 2.0 ** -53 for k in range(n)]


class TestAgainstReference:
    @given(st.integers(min_value=0, max_value=MASK))
    def test_mix64(self, z):
        assert int(mix64(np.uint64(z))) == ref_mix(z)

    @settings(max_examples=50)
    @given(st.integers(min_value=0, max_value=MASK), st.integers(min_value=0, max_value=1000))
    def test_uniform_stream(self, seed, path):
        s = Streams(seed, 1, first_path=path)
        got = [float(s.uniform()[0]) for _ in range(5)]
        assert got == ref_uniforms(seed, path, 5)

    def test_known_first_draws_seed_42(self):
        s = Streams(42, 1)
        got = [float(s.uniform()[0]) for _ in range(3)]
        assert got == [0.6146409341949204, 0.45010882945711317, 0.20639215340029482]

    def test_negative_seed_wraps(self):
        a = Streams(-1, 3).uniform()
        b = Streams(MASK, 3).uniform()
        np.testing.assert_array_equal(a, b)


class TestStreams:
    def test_deterministic(self):
        a, b = Streams(7, 100), Streams(7, 100)
        for _ in range(4):
            np.testing.assert_array_equal(a.uniform(), b.uniform())

    def test_batching_independent(self):
        whole = Streams(3, 10)
        first, second = Streams(3, 4), Streams(3, 6, first_path=4)
        for _ in range(3):
            np.testing.assert_array_equal(whole.uniform(), np.concatenate([first.uniform(), second.uniform()]))

    def test_small_seeds_give_different_streams(self):
        # a raw seed XOR path index would map seeds 1 and 2 onto the same key set
        a = np.sort(Streams(1, 4096).uniform())
        b = np.sort(Streams(2, 4096).uniform())
        assert not np.array_equal(a, b)

    def test_paths_have_distinct_keys(self):
        keys = path_keys(0, 10_000)
        assert np.unique(keys).size == keys.size

    def test_active_subset_advances_only_those(self):
        s = Streams(5, 4)
        s.uniform(np.array([0, 2]))
        np.testing.assert_array_equal(s.counters, np.array([1, 0, 1, 0], dtype=np.uint64))

    def test_uniform_range_and_law(self):
        u = Streams(11, 100_000).uniform()
        assert u.min() >= 0.0 and u.max() < 1.0
        assert stats.kstest(u, "uniform").pvalue > 1e-4

    def test_normal_law(self):
        z = Streams(12, 100_000).normal()
        n = z.size
        assert abs(z.mean()) <= 4 / math.sqrt(n)
        assert abs(z.var() - 1) <= 4 * math.sqrt(2 / n)
        assert stats.kstest(z, "norm").pvalue > 1e-4

    def test_normal_is_box_muller(self):
        u1, u2 = ref_uniforms(9, 0, 2)
        expected = math.sqrt(-2 * math.log1p(-u1)) * math.cos(2 * math.pi * u2)
        assert float(Streams(9, 1).normal()[0]) == pytest.approx(expected, abs=1e-15)


class TestPoisson:
    @pytest.mark.parametrize("mean", [0.3, 2.0, 9.5, 10.5, 40.0, 500.0])
    def test_moments(self, mean):
        k = Streams(21, 100_000).poisson(mean)
        n = k.size
        assert k.min() >= 0
        assert abs(k.mean() - mean) <= 4 * math.sqrt(mean / n)
        assert abs(k.var(ddof=1) - mean) <= 4 * mean * math.sqrt(2 / n) + 4 * math.sqrt(mean / n)

    @pytest.mark.parametrize("mean", [3.0, 25.0])
    def test_pmf_chi_square(self, mean):
        k = Streams(33, 200_000).poisson(mean)
        lo, hi = int(stats.poisson.ppf(1e-3, mean)), int(stats.poisson.ppf(1 - 1e-3, mean))
        # bins: below lo (dropped when lo is 0), lo..hi, above hi
        observed = np.bincount(np.clip(k, lo - 1, hi + 1) - (lo - 1), minlength=hi - lo + 3)
        probs = np.array([stats.poisson.cdf(lo - 1, mean),
                          *stats.poisson.pmf(np.arange(lo, hi + 1), mean),
                          stats.poisson.sf(hi, mean)])
        if lo == 0:
            observed, probs = observed[1:], probs[1:]
        probs /= probs.sum()
        assert stats.chisquare(observed, probs * k.size).pvalue > 1e-4

    def test_zero_mean(self):
        np.testing.assert_array_equal(Streams(1, 5).poisson(0.0), np.zeros(5))

    @pytest.mark.parametrize("mean", [-1.0, math.inf, math.nan])
    def test_bad_mean(self, mean):
        with pytest.raises(ValueError):
            Streams(1, 5).poisson(mean)
