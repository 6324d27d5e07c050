import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aimarket import stats
from aimarket.config import small_market
from aimarket.stats import (
    DegenerateSeries,
    acf_squared,
    compute_returns,
    excess_kurtosis,
    run_statistics,
    stylized_report,
)


class TestReturns:
    def test_constant(self):
        assert not compute_returns(np.full(1001, 5.0), 100).any()

    def test_doubling(self):
        prices = 2.0 ** (np.arange(1001) / 100)
        r = compute_returns(prices, 100, window=(0, 1000))
        assert np.allclose(r, math.log(2))

    def test_length(self):
        r = compute_returns(np.ones(10001), 100, window=(2001, 10000))
        assert len(r) == 79

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            compute_returns(np.ones(50), 100, window=(1, 49))

    def test_warmup_window_rejected(self):
        with pytest.raises(ValueError, match="warm-up"):
            compute_returns(np.ones(3001), 100, window=(1, 1999), warmup=2000)


class TestKurtosis:
    def test_gaussian(self):
        x = np.random.default_rng(0).standard_normal(10**6)
        assert abs(excess_kurtosis(x)) < 0.05

    def test_two_point(self):
        # m2 = 1, m4 = 1  ->  1 - 3
        assert excess_kurtosis([1, -1, 1, -1]) == -2.0

    def test_degenerate(self):
        with pytest.raises(DegenerateSeries):
            excess_kurtosis([3.0] * 10)

    @given(st.floats(-100, 100).filter(lambda a: abs(a) > 1e-3), st.floats(-100, 100))
    def test_affine_invariance(self, a, b):
        x = np.random.default_rng(1).standard_t(5, 500)
        assert excess_kurtosis(a * x + b) == pytest.approx(excess_kurtosis(x), rel=1e-6, abs=1e-6)


class TestACF:
    def test_white_noise(self):
        x = np.random.default_rng(2).standard_normal(5000)
        assert np.all(np.abs(acf_squared(x)) < 3 / math.sqrt(5000))

    def test_volatility_regimes(self):
        rng = np.random.default_rng(3)
        scale = np.repeat(np.tile([0.1, 3.0], 50), 20)
        x = rng.standard_normal(len(scale)) * scale
        assert acf_squared(x)[0] > 0

    def test_too_short(self):
        with pytest.raises(ValueError):
            acf_squared(np.arange(6.0))

    @given(st.lists(st.floats(-10, 10), min_size=8, max_size=60))
    def test_bounded(self, xs):
        sq = np.square(xs)
        if np.ptp(sq) < 1e-6:
            return
        v = acf_squared(xs)
        assert np.all(np.abs(v) <= 1 + 1e-12)


class TestReport:
    def test_single_seed_equals_direct(self):
        cfg = small_market(t_c=200, t_e=2200)
        rep = stylized_report(cfg, [4])
        std, kurt, acf = run_statistics(cfg, 4)
        assert rep.std_returns == std and rep.kurtosis == kurt and rep.acf_sq == acf.tolist()

    def test_degenerate_excluded_with_warning(self, monkeypatch):
        real = stats.run_statistics

        def flaky(cfg, seed, interval=100):
            if seed == 2:
                raise DegenerateSeries("zero variance")
            return real(cfg, seed, interval)

        monkeypatch.setattr(stats, "run_statistics", flaky)
        cfg = small_market(t_c=200, t_e=2200)
        with pytest.warns(UserWarning, match="seed 2"):
            rep = stylized_report(cfg, [1, 2, 3])
        assert rep.n_runs == 2 and rep.seeds == [1, 3] and 2 in rep.excluded

    def test_outputs(self):
        rep = stylized_report(small_market(t_c=200, t_e=2200), [1, 2])
        assert '"reference"' in rep.to_json()
        rows = rep.table_csv().splitlines()
        assert rows[0] == "statistic,lag,value,reference" and len(rows) == 8
