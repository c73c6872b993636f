import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from ginar import GinarModel, InnovationSpec, SeasonalMeanModel
from ginar.forecast import (EQUAL_TAILED, MIN_MASS, forecast_mc, forecast_mean,
                            forecast_paths, one_step_coverage)
from ginar.transition import transition_prob_davies

PO1 = GinarModel((0.5,), InnovationSpec("poisson", 1.0))


def test_forecast_mean_examples():
    white = GinarModel((0.0,), InnovationSpec("poisson", 1.7))
    assert np.allclose(forecast_mean(white, [9], 4), 1.7)
    assert np.allclose(forecast_mean(PO1, [4], 3), [3.0, 2.5, 2.25])
    model = GinarModel((0.4, 0.3), InnovationSpec("poisson", 1.5))
    assert forecast_mean(model, [20, 1], 200)[-1] == pytest.approx(model.marginal_mean(), abs=1e-6)


def test_white_noise_horizon_one_matches_innovation():
    white = GinarModel((0.0,), InnovationSpec("poisson", 2.0))
    dist = forecast_mc(white, [5], 1, 100_000, seed=1)
    pmf = dist.pmf_dict(1)
    support = np.arange(40)
    emp = np.array([pmf.get(k, 0.0) for k in support])
    assert 0.5 * np.abs(emp - stats.poisson.pmf(support, 2.0)).sum() < 0.02


def test_horizon_one_matches_transition_kernel():
    dist = forecast_mc(PO1, [6], 1, 100_000, seed=2)
    pmf = dist.pmf_dict(1)
    support = np.arange(41)
    emp = np.array([pmf.get(k, 0.0) for k in support])
    exact = np.array([transition_prob_davies(PO1, k, [6]) for k in support])
    assert 0.5 * np.abs(emp - exact).sum() < 0.02


def test_sample_means_follow_recursion():
    model = GinarModel((0.3, 0.2), InnovationSpec("negbinomial", 1.0, 0.5))
    paths = forecast_paths(model, [2, 7], 5, 50_000, seed=3)
    expected = forecast_mean(model, [2, 7], 5)
    se = paths.std(axis=0) / np.sqrt(len(paths))
    assert np.all(np.abs(paths.mean(axis=0) - expected) < 4 * se)


def test_distribution_invariants():
    dist = forecast_mc(PO1, [1, 3], 4, 5000, levels=(0.5, 0.8, 0.95), seed=4)
    for k in range(1, 5):
        pmf = dist.pmf_dict(k)
        assert sum(pmf.values()) == pytest.approx(1.0, abs=1e-12)
        assert dist.median[k - 1] in pmf
        for level, pairs in dist.intervals.items():
            lo, hi = pairs[k - 1]
            assert isinstance(lo, int) and isinstance(hi, int)
            assert lo <= dist.median[k - 1] <= hi
            mass = sum(f for c, f in pmf.items() if lo <= c <= hi)
            assert mass >= level - 1e-12


def test_equal_tailed_rule():
    dist = forecast_mc(PO1, [3], 1, 20_000, levels=(0.9,), seed=5, interval_rule=EQUAL_TAILED)
    paths = forecast_paths(PO1, [3], 1, 20_000, seed=5)[:, 0]
    lo, hi = dist.intervals[0.9][0]
    assert lo == int(np.quantile(paths, 0.05, method="inverted_cdf"))
    assert hi == int(np.quantile(paths, 0.95, method="inverted_cdf"))


def test_min_mass_interval_is_tight():
    dist = forecast_mc(PO1, [3], 1, 20_000, levels=(0.95,), seed=6)
    pmf = dist.pmf_dict(1)
    lo, hi = dist.intervals[0.95][0]
    mass = sum(f for c, f in pmf.items() if lo <= c <= hi)
    # no other contiguous interval reaches the level with less mass
    keys = sorted(pmf)
    for a in keys:
        for b in keys:
            m = sum(f for c, f in pmf.items() if a <= c <= b)
            if m >= 0.95 - 1e-12:
                assert m >= mass - 1e-12


def test_lower_median():
    white = GinarModel((0.0,), InnovationSpec("poisson", 1.0))
    assert forecast_mc(white, [0], 1, 20_000, seed=7).median == (1,)


def test_determinism():
    a = forecast_mc(PO1, [2], 3, 2000, (0.8, 0.95), seed=11)
    b = forecast_mc(PO1, [2], 3, 2000, (0.8, 0.95), seed=11)
    assert a.to_json() == b.to_json()
    assert a.to_json() != forecast_mc(PO1, [2], 3, 2000, (0.8, 0.95), seed=12).to_json()


def test_seasonal_forecast_uses_future_times():
    seasonal = SeasonalMeanModel(np.log(3.0), 1.0, 0.0, 4)
    white = GinarModel((0.0,), InnovationSpec("poisson", 3.0))
    paths = forecast_paths(white, [0], 4, 40_000, seed=8, seasonal=seasonal, start_time=1)
    expected = 3.0 * np.exp(np.sin(2 * np.pi * np.arange(1, 5) / 4))
    assert np.allclose(paths.mean(axis=0), expected, rtol=0.03)


def test_coverage_edges():
    x = PO1.simulate(120, np.random.default_rng(9))
    assert one_step_coverage(PO1, x, 1.0, 1000, seed=1) == 1.0
    covs = [one_step_coverage(PO1, x, level, 1000, seed=1) for level in (0.5, 0.8, 0.95)]
    assert covs == sorted(covs)


@settings(max_examples=50)
@given(levels=st.lists(st.floats(0.05, 1.0), min_size=2, max_size=4, unique=True),
       seed=st.integers(0, 1000), last=st.integers(0, 12))
def test_property_intervals_nested(levels, seed, last):
    dist = forecast_mc(PO1, [last], 2, 500, levels=tuple(levels), seed=seed)
    ordered = sorted(dist.intervals)
    for k in range(2):
        for small, big in zip(ordered, ordered[1:]):
            lo_s, hi_s = dist.intervals[small][k]
            lo_b, hi_b = dist.intervals[big][k]
            pmf = dist.pmf_dict(k + 1)
            mass = lambda lo, hi: sum(f for c, f in pmf.items() if lo <= c <= hi)
            assert mass(lo_b, hi_b) >= mass(lo_s, hi_s) - 1e-12
