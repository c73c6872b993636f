import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ginar.errors import DomainError, InvalidParameterError
from ginar.innovations import (InnovationSpec, innovation_cgf, innovation_chf, innovation_pmf,
                               innovation_sample, pmf_support_limit)

SPECS = [InnovationSpec("poisson", 1.3), InnovationSpec("negbinomial", 1.0, 1.0),
         InnovationSpec("geometric", 0.8)]


def test_pmf_examples():
    assert innovation_pmf(InnovationSpec("poisson", 1.0), 0) == pytest.approx(np.exp(-1.0))
    assert innovation_pmf(InnovationSpec("geometric", 1.0), 2) == pytest.approx(1 / 8)
    x = np.arange(401)
    pmf = innovation_pmf(InnovationSpec("negbinomial", 1.0, 1.0), x)
    mean = pmf @ x
    assert mean == pytest.approx(1.0, abs=1e-8)
    assert pmf @ x**2 - mean**2 == pytest.approx(2.0, abs=1e-8)


def test_variance_by_family():
    assert SPECS[0].variance() == pytest.approx(1.3)
    assert SPECS[1].variance() == pytest.approx(2.0)
    assert SPECS[2].variance() == pytest.approx(0.8 * 1.8)


def test_validation():
    with pytest.raises(InvalidParameterError):
        InnovationSpec("poisson", 0.0)
    with pytest.raises(InvalidParameterError):
        InnovationSpec("negbinomial", 1.0)
    with pytest.raises(InvalidParameterError):
        InnovationSpec("poisson", 1.0, 0.5)


def test_chf_examples(rng):
    assert innovation_chf(InnovationSpec("poisson", 2.0), np.pi) == pytest.approx(np.exp(-4.0))
    u = rng.uniform(-np.pi, np.pi, 20)
    for spec in SPECS:
        assert innovation_chf(spec, 0.0) == 1.0
        x = np.arange(pmf_support_limit(spec, 1e-16) + 1)
        series = (innovation_pmf(spec, x) * np.exp(1j * np.outer(u, x))).sum(axis=1)
        assert np.max(np.abs(series - innovation_chf(spec, u))) < 1e-10


@pytest.mark.parametrize("spec", SPECS)
def test_cgf_derivatives(spec):
    u, h = -0.3, 1e-5
    K, K1, K2 = innovation_cgf(spec, u)
    x = np.arange(pmf_support_limit(spec, 1e-16) + 1)
    assert K == pytest.approx(np.log(innovation_pmf(spec, x) @ np.exp(u * x)), abs=1e-12)
    Kp, _, _ = innovation_cgf(spec, u + h)
    Km, _, _ = innovation_cgf(spec, u - h)
    assert K1 == pytest.approx((Kp - Km) / (2 * h), rel=1e-7)
    K1p = innovation_cgf(spec, u + h)[1]
    K1m = innovation_cgf(spec, u - h)[1]
    assert K2 == pytest.approx((K1p - K1m) / (2 * h), rel=1e-7)
    assert innovation_cgf(spec, 0.0)[1] == pytest.approx(spec.mean())
    assert innovation_cgf(spec, 0.0)[2] == pytest.approx(spec.variance())


def test_cgf_domain():
    spec = InnovationSpec("geometric", 1.0)
    with pytest.raises(DomainError):
        innovation_cgf(spec, np.log(2.0))


@pytest.mark.parametrize("spec", SPECS)
def test_sampling_moments(spec, rng):
    draws = innovation_sample(spec, rng, size=200_000)
    assert abs(draws.mean() - spec.mean()) < 4 * np.sqrt(spec.variance() / len(draws))
    assert draws.var() == pytest.approx(spec.variance(), rel=0.03)
    assert isinstance(innovation_sample(spec, rng), int)


@settings(max_examples=1000)
@given(mu=st.floats(0.01, 30.0), r=st.floats(0.05, 5.0), which=st.integers(0, 2),
       u=st.floats(-20.0, 20.0))
def test_property_normalisation_and_chf(mu, r, which, u):
    family = ["poisson", "negbinomial", "geometric"][which]
    spec = InnovationSpec(family, mu, r if family == "negbinomial" else None)
    x = np.arange(pmf_support_limit(spec, 1e-14) + 1)
    assert abs(innovation_pmf(spec, x).sum() - 1.0) < 1e-8
    assert innovation_chf(spec, 0.0) == 1.0
    assert abs(innovation_chf(spec, u)) <= 1.0 + 1e-12
