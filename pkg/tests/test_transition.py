import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ginar import GinarModel, InnovationSpec
from ginar.innovations import innovation_chf, innovation_pmf
from ginar.thinning import NEGBINOMIAL
from ginar.transition import (LOG_FLOOR, davies_series_probs, default_rule, gauss_legendre,
                              log_transition, series_probs, transition_cdf_davies,
                              transition_cdf_davies_full, transition_chf, transition_prob_conv,
                              transition_prob_davies)

PO1 = GinarModel((0.5,), InnovationSpec("poisson", 1.0))
PO2 = GinarModel((0.3, 0.2), InnovationSpec("poisson", 1.0))
NB1 = GinarModel((0.5,), InnovationSpec("negbinomial", 1.0, 1.0))
GEOM2 = GinarModel((0.3, 0.2), InnovationSpec("poisson", 1.0), NEGBINOMIAL)


def test_quadrature_rule():
    rule = gauss_legendre(300)
    assert rule.count == 300
    assert rule.weights.sum() == pytest.approx(np.pi, abs=1e-10)
    assert np.all(np.diff(rule.nodes) > 0)
    assert 0 < rule.nodes[0] and rule.nodes[-1] < np.pi


def test_conv_examples():
    white = GinarModel((0.0,), InnovationSpec("poisson", 1.0))
    for x in range(6):
        assert transition_prob_conv(white, x, [4]) == pytest.approx(innovation_pmf(white.innovation, x))
    assert transition_prob_conv(PO1, 0, [2]) == pytest.approx(np.exp(-1) * 0.25, abs=1e-15)
    total = sum(transition_prob_conv(PO2, x, [3, 4]) for x in range(61))
    assert total == pytest.approx(1.0, abs=1e-10)


def test_chf_examples(rng):
    assert transition_chf(PO2, 0.0, [3, 4]) == pytest.approx(1.0)
    u = rng.uniform(-np.pi, np.pi, 10)
    assert np.allclose(transition_chf(NB1, u, [0]), innovation_chf(NB1.innovation, u))
    x = np.arange(80)
    pmf = np.array([transition_prob_conv(GEOM2, k, [3, 2]) for k in x])
    series = (pmf * np.exp(1j * np.outer(u, x))).sum(axis=1)
    assert np.max(np.abs(series - transition_chf(GEOM2, u, [3, 2]))) < 1e-8


def test_davies_examples():
    white = GinarModel((0.0,), InnovationSpec("poisson", 1.0))
    assert transition_prob_davies(white, 1, [3]) == pytest.approx(np.exp(-1), abs=1e-12)
    assert transition_prob_davies(PO1, 0, [2]) == pytest.approx(np.exp(-1) * 0.25, abs=1e-8)


@pytest.mark.parametrize("model", [PO2, NB1, GEOM2])
def test_davies_matches_convolution(model, rng):
    lags = rng.integers(0, 15, size=(20, model.p))
    x = np.repeat(np.arange(51), len(lags))
    lag_rows = np.tile(lags, (51, 1))
    davies = davies_series_probs(model, x, lag_rows, default_rule(300), clamp=False)
    from ginar.transition import conv_series_probs
    exact = conv_series_probs(model, x, lag_rows)
    assert np.max(np.abs(davies - exact)) < 1e-8
    # pre-clamp excursions outside [0, 1] are negligible
    assert davies.min() > -1e-9 and davies.max() < 1 + 1e-9


def test_cdf_examples():
    white = GinarModel((0.0,), InnovationSpec("poisson", 1.0))
    assert transition_cdf_davies(white, 1, [2]) == pytest.approx(np.exp(-1), abs=1e-10)
    a = np.array([transition_cdf_davies(GEOM2, x, [4, 1]) for x in range(1, 60)])
    assert np.all(np.diff(a) >= -1e-12)
    assert a[-1] == pytest.approx(1.0, abs=1e-8)
    for x in range(1, 20):
        b = transition_prob_davies(GEOM2, x, [4, 1], clamp=False)
        assert a[x] - a[x - 1] == pytest.approx(b, abs=1e-8)


def test_cdf_half_range_equals_full_range():
    for x in (1, 3, 7):
        assert transition_cdf_davies(NB1, x, [5]) == pytest.approx(
            transition_cdf_davies_full(NB1, x, [5]), abs=1e-10)


def test_log_transition():
    p = transition_prob_conv(PO2, 4, [3, 2])
    assert np.exp(log_transition(PO2, 4, [3, 2], "exact")) == pytest.approx(p, rel=1e-12)
    assert log_transition(PO2, 4, [3, 2], "davies") == pytest.approx(np.log(p), abs=1e-6)
    assert log_transition(PO1, 400, [0], "exact") == LOG_FLOOR


def test_series_probs_methods_agree(rng):
    x = PO2.simulate(300, rng)
    assert np.allclose(series_probs(PO2, x, "exact"), series_probs(PO2, x, "davies"), atol=1e-10)


def test_time_varying_mean_matches_constant():
    x = np.array([1, 2, 0, 3, 1, 4])
    mu = np.full(5, 1.0)
    assert np.allclose(series_probs(PO1, x, "davies", mu=mu), series_probs(PO1, x, "davies"))
    assert np.allclose(series_probs(PO1, x, "exact", mu=mu), series_probs(PO1, x, "exact"))


@settings(max_examples=200)
@given(lag1=st.integers(0, 12), lag2=st.integers(0, 12), which=st.integers(0, 1))
def test_property_normalisation(lag1, lag2, which):
    model = [PO2, GEOM2][which]
    x = np.arange(120)
    lags = np.tile([lag1, lag2], (120, 1))
    for method in ("exact", "davies"):
        from ginar.transition import conv_series_probs
        probs = (conv_series_probs(model, x, lags) if method == "exact"
                 else davies_series_probs(model, x, lags, default_rule()))
        assert abs(probs.sum() - 1.0) < 1e-8
