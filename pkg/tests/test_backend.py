import numpy as np
import pytest

from ginar import GinarModel, InnovationSpec, ThinningSpec
from ginar._backend import get_backend, set_backend
from ginar.estimation import ModelTemplate, fit_cml
from ginar.estimation.saddle import saddle_terms
from ginar.forecast import forecast_paths
from ginar.thinning import NEGBINOMIAL
from ginar.transition import conv_series_probs, davies_series_probs, default_rule, lag_matrix

MODELS = [
    GinarModel((0.3, 0.2), InnovationSpec("poisson", 1.5)),
    GinarModel((0.5,), InnovationSpec("negbinomial", 1.0, 0.8)),
    GinarModel((0.4,), InnovationSpec("geometric", 1.2), NEGBINOMIAL),
    GinarModel((0.3, 0.1), InnovationSpec("poisson", 2.0), ThinningSpec("rhobinomial", 0.3)),
]


@pytest.fixture
def both():
    previous = get_backend()

    def run(func):
        out = {}
        for name in ("numba", "numpy"):
            set_backend(name)
            out[name] = func()
        set_backend(previous)
        return out["numba"], out["numpy"]

    yield run
    set_backend(previous)


def test_set_backend_validates():
    with pytest.raises(ValueError):
        set_backend("fortran")


@pytest.mark.parametrize("model", MODELS)
def test_simulation_identical(model, both):
    a, b = both(lambda: model.simulate(3000, np.random.default_rng(1), burnin=50))
    assert np.array_equal(a, b)


@pytest.mark.parametrize("model", MODELS)
def test_forecast_identical(model, both):
    a, b = both(lambda: forecast_paths(model, [4, 2, 6], 5, 2000, seed=2))
    assert np.array_equal(a, b)


@pytest.mark.parametrize("model", MODELS)
def test_transition_kernels_agree(model, both):
    x = MODELS[0].simulate(400, np.random.default_rng(3))
    lags = lag_matrix(x, model.p)
    y = x[model.p:]
    a, b = both(lambda: davies_series_probs(model, y, lags, default_rule(), np.full(len(y), 1.3)))
    assert np.allclose(a, b, rtol=1e-12, atol=1e-15)
    a, b = both(lambda: conv_series_probs(model, y, lags))
    assert np.allclose(a, b, rtol=1e-12, atol=1e-15)


def test_saddle_kernels_agree(both):
    model = GinarModel((0.3, 0.2), InnovationSpec("negbinomial", 1.0, 0.5))
    x = model.simulate(500, np.random.default_rng(4))
    (la, oa), (lb, ob) = both(lambda: saddle_terms(x, model))
    assert np.array_equal(oa, ob)
    assert np.allclose(la, lb, rtol=1e-10, atol=1e-12)


def test_fits_agree(both):
    x = MODELS[0].simulate(300, np.random.default_rng(5))
    a, b = both(lambda: fit_cml(x, ModelTemplate(2)).theta)
    assert np.allclose(a, b, atol=1e-6)
