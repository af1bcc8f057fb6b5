import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bayesload.distributions import (
    GammaSpec,
    NormalSpec,
    make_rng,
    sample_gamma,
    sample_normal,
    sample_uniform,
    spawn_rngs,
)
from bayesload.errors import InvalidParameterError

N = 1_000_000


class TestSpecs:
    @pytest.mark.parametrize("precision", [0.0, -1.0, np.inf, np.nan])
    def test_normal_rejects_bad_precision(self, precision):
        with pytest.raises(InvalidParameterError):
            NormalSpec(0.0, precision)

    def test_normal_rejects_nonfinite_mean(self):
        with pytest.raises(InvalidParameterError):
            NormalSpec(np.nan, 1.0)

    @pytest.mark.parametrize("shape,rate", [(0, 1), (1, 0), (-1, 1), (1, np.inf)])
    def test_gamma_rejects_bad_values(self, shape, rate):
        with pytest.raises(InvalidParameterError):
            GammaSpec(shape, rate)

    def test_from_variance(self):
        s = NormalSpec.from_variance(2.0, 0.25)
        assert s.precision == 4.0
        assert s.std == 0.5

    def test_gamma_moments(self):
        g = GammaSpec(2.0, 4.0)
        assert g.mean == 0.5
        assert g.variance == 0.125


class TestSampleNormal:
    def test_concentrated(self):
        x = sample_normal(NormalSpec(0.0, 1e12), make_rng(0), size=1000)
        assert np.all(np.abs(x) < 1e-5)

    def test_moments(self):
        x = sample_normal(NormalSpec(5.0, 4.0), make_rng(1), size=N)
        assert abs(x.mean() - 5.0) < 0.01
        assert abs(x.var() - 0.25) < 0.01

    def test_deterministic(self):
        a = sample_normal(NormalSpec(0, 1), make_rng(42), size=100)
        b = sample_normal(NormalSpec(0, 1), make_rng(42), size=100)
        np.testing.assert_array_equal(a, b)

    def test_scalar_draw(self):
        assert np.isscalar(sample_normal(NormalSpec(0, 1), make_rng(0)))


class TestSampleGamma:
    def test_mean_unit(self):
        x = sample_gamma(GammaSpec(1.0, 1.0), make_rng(2), size=N)
        assert abs(x.mean() - 1.0) < 0.01

    def test_variance_shape_rate(self):
        x = sample_gamma(GammaSpec(2.0, 4.0), make_rng(3), size=N)
        assert abs(x.var() - 0.125) < 0.005
        assert abs(x.mean() - 0.5) < 0.005

    @settings(max_examples=30, deadline=None)
    @given(st.floats(1e-3, 1e4), st.floats(1e-3, 1e4), st.integers(0, 2**32))
    def test_positive(self, shape, rate, seed):
        x = sample_gamma(GammaSpec(shape, rate), make_rng(seed), size=200)
        assert np.all(x > 0)

    def test_small_shape_mean(self):
        x = sample_gamma(GammaSpec(0.2, 2.0), make_rng(4), size=N)
        se = np.sqrt(0.2 / 4.0 / N)
        assert abs(x.mean() - 0.1) < 3 * se


class TestSampleUniform:
    def test_mean(self):
        x = sample_uniform(0.1, 4.5, make_rng(5), size=N)
        assert abs(x.mean() - 2.3) < 0.01

    def test_range(self):
        x = sample_uniform(0.0, 1.0, make_rng(6), size=N)
        assert x.min() >= 0.0 and x.max() < 1.0

    @pytest.mark.parametrize("lo,hi", [(1.0, 1.0), (2.0, 1.0)])
    def test_rejects_empty_range(self, lo, hi):
        with pytest.raises(InvalidParameterError):
            sample_uniform(lo, hi, make_rng(0))

    def test_deterministic(self):
        np.testing.assert_array_equal(
            sample_uniform(0, 1, make_rng(7), size=50), sample_uniform(0, 1, make_rng(7), size=50)
        )


def test_spawned_streams_differ():
    a, b = spawn_rngs(0, 2)
    assert a.random() != b.random()
