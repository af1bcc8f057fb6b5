import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bayesload.chain import Chain
from bayesload.diagnostics import burn_in_check, coverage_test, integrated_time, summarize, summarize_all
from bayesload.errors import InsufficientSamplesError, InvalidParameterError


def chain_of(*cols, burn_in=0):
    return Chain(np.column_stack(cols), tuple(f"p{i}" for i in range(len(cols))), burn_in)


def ar1(n, phi, rng):
    e = rng.normal(size=n)
    x = np.empty(n)
    x[0] = e[0] / np.sqrt(1 - phi**2)
    for i in range(1, n):
        x[i] = phi * x[i - 1] + e[i]
    return x


class TestChain:
    def test_burn_in_bounds(self):
        with pytest.raises(InvalidParameterError):
            chain_of(np.zeros(5), burn_in=5)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidParameterError):
            Chain(np.zeros((4, 2)), ("a",), 0)

    def test_views(self):
        c = chain_of(np.arange(10.0), burn_in=4)
        assert c.total == 10
        np.testing.assert_array_equal(c.column("p0"), np.arange(4.0, 10.0))
        assert c.posterior_mean(0) == 6.5
        with pytest.raises(KeyError):
            c.index("zz")


class TestSummarize:
    def test_constant(self):
        s = summarize(chain_of(np.full(100, 3.5)), 0)
        assert s.mean == 3.5 and s.std == 0.0
        assert s.credible_interval == (3.5, 3.5)

    def test_standard_normal(self):
        x = np.random.default_rng(0).normal(size=1_000_000)
        s = summarize(chain_of(x), 0)
        assert abs(s.mean) < 0.01
        assert s.credible_interval[0] == pytest.approx(-1.96, abs=0.02)
        assert s.credible_interval[1] == pytest.approx(1.96, abs=0.02)

    def test_uses_post_burn_in_only(self):
        x = np.concatenate([np.full(50, 100.0), np.zeros(50)])
        s = summarize(chain_of(x, burn_in=50), 0)
        assert s.mean == 0.0 and s.n_samples == 50

    def test_histogram_counts(self):
        x = np.random.default_rng(1).normal(size=777)
        s = summarize(chain_of(x, burn_in=77), 0, bins=13)
        edges, counts = s.histogram
        assert counts.sum() == 700 and edges.size == 14

    @settings(max_examples=20)
    @given(st.integers(0, 2**32 - 1))
    def test_permutation_invariant(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=200)
        a = summarize(chain_of(x), 0)
        b = summarize(chain_of(rng.permutation(x)), 0)
        assert a.mean == pytest.approx(b.mean, abs=1e-12)
        assert a.credible_interval == b.credible_interval
        np.testing.assert_array_equal(a.histogram[1], b.histogram[1])

    def test_too_few(self):
        with pytest.raises(InsufficientSamplesError):
            summarize(chain_of(np.zeros(3), burn_in=2), 0)

    @pytest.mark.parametrize("level", [0.0, 1.0, 1.5])
    def test_bad_level(self, level):
        with pytest.raises(InvalidParameterError):
            summarize(chain_of(np.zeros(10)), 0, level)

    def test_summarize_all_names(self):
        out = summarize_all(chain_of(np.zeros(5), np.ones(5)))
        assert [s.name for s in out] == ["p0", "p1"]

    def test_increasing_burn_in_stationary(self):
        x = np.random.default_rng(2).normal(size=20000)
        se = x.std() / np.sqrt(15000)
        a = summarize(chain_of(x, burn_in=2000), 0).mean
        b = summarize(chain_of(x, burn_in=5000), 0).mean
        assert abs(a - b) < 3 * se


class TestIntegratedTime:
    def test_white_noise(self):
        assert integrated_time(np.random.default_rng(3).normal(size=50000)) == pytest.approx(1.0, abs=0.1)

    def test_ar1(self):
        # analytic value (1 + phi)/(1 - phi) = 9 for phi = 0.8
        x = ar1(200_000, 0.8, np.random.default_rng(4))
        assert integrated_time(x) == pytest.approx(9.0, rel=0.1)

    def test_constant(self):
        assert integrated_time(np.ones(10)) == 1.0


class TestBurnIn:
    def test_stationary(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=10000)
        rep = burn_in_check(chain_of(x), window=1000)
        row = rep["p0"]
        assert row.difference < 3 * x.std() / np.sqrt(1000) * np.sqrt(2)
        assert rep.stable

    def test_trend_flagged(self):
        n, w, slope = 10000, 1000, 1e-3
        x = slope * np.arange(n) + np.random.default_rng(6).normal(size=n)
        rep = burn_in_check(chain_of(x), window=w)
        assert rep["p0"].difference == pytest.approx(slope * (n - w), rel=0.1)
        assert rep["p0"].flagged and not rep.stable

    def test_constant(self):
        rep = burn_in_check(chain_of(np.full(100, 2.0)), window=10)
        assert rep["p0"].difference == 0.0 and rep.stable

    def test_correlated_stationary_not_flagged(self):
        flags = 0
        for seed in range(20):
            x = ar1(20000, 0.95, np.random.default_rng(100 + seed))
            flags += burn_in_check(chain_of(x), window=2000)["p0"].flagged
        assert flags <= 2

    @pytest.mark.parametrize("window", [1, 100, 500])
    def test_window_too_large(self, window):
        with pytest.raises(InvalidParameterError):
            burn_in_check(chain_of(np.zeros(200), burn_in=100), window=window)


class TestCoverage:
    def _summaries(self, shift):
        rng = np.random.default_rng(7)
        return [summarize(chain_of(rng.normal(size=500) + shift), 0) for _ in range(30)]

    def test_shifted_misses(self):
        assert coverage_test(0.0, self._summaries(10.0)) == 0.0

    def test_centred(self):
        assert 0.85 <= coverage_test(0.0, self._summaries(0.0)) <= 1.0

    def test_degenerate(self):
        s = [summarize(chain_of(np.full(10, 0.3)), 0) for _ in range(20)]
        assert coverage_test(0.3, s) == 1.0

    def test_too_few(self):
        with pytest.raises(InvalidParameterError):
            coverage_test(0.0, self._summaries(0.0)[:5])
