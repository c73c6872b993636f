import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from ginar.errors import InvalidParameterError
from ginar.thinning import (BINOMIAL, NEGBINOMIAL, ThinningSpec, counting_chf, counting_pmf,
                            thin, thinned_pmf, thinned_pmf_table, variance_coeff)

RHO = ThinningSpec("rhobinomial", 0.2)
SPECS = [BINOMIAL, NEGBINOMIAL, RHO]
alphas = st.floats(0.0, 0.99)


def brute_convolution(spec, alpha, x, zmax):
    base = counting_pmf(spec, alpha, np.arange(zmax + 1))
    out = np.zeros(zmax + 1)
    out[0] = 1.0
    for _ in range(x):
        out = np.convolve(out, base)[:zmax + 1]
    return out


def test_empty_sum_and_identity(rng):
    assert thin(BINOMIAL, 0.3, 0, rng) == 0
    assert thin(BINOMIAL, 1.0, 5, rng) == 5


def test_alpha_outside_unit_interval_rejected(rng):
    with pytest.raises(InvalidParameterError):
        thin(BINOMIAL, 1.2, 3, rng)
    with pytest.raises(InvalidParameterError):
        counting_pmf(NEGBINOMIAL, -0.1, 0)


def test_rho_requires_dispersion():
    with pytest.raises(InvalidParameterError):
        ThinningSpec("rhobinomial")
    with pytest.raises(InvalidParameterError):
        ThinningSpec("binomial", 0.3)


def test_negbinomial_thinning_moments(rng):
    draws = np.array([thin(NEGBINOMIAL, 0.5, 1000, rng) for _ in range(100_000)])
    se = np.sqrt(750.0 / len(draws))
    assert abs(draws.mean() - 500.0) < 3 * se
    assert draws.var() == pytest.approx(750.0, rel=0.03)


@pytest.mark.parametrize("spec", SPECS)
def test_moment_laws(spec, rng):
    alpha, x = 0.4, 150
    draws = np.array([thin(spec, alpha, x, rng) for _ in range(100_000)])
    beta = variance_coeff(spec, alpha)
    assert abs(draws.mean() - alpha * x) < 4 * np.sqrt(x * beta / len(draws))
    assert draws.var() == pytest.approx(x * beta, rel=0.05)


def test_counting_pmf_examples():
    assert counting_pmf(BINOMIAL, 0.3, 1) == pytest.approx(0.3)
    assert counting_pmf(NEGBINOMIAL, 0.5, 0) == pytest.approx(1 / 1.5)
    # success probability 0.4 in the raw rho-Bernoulli law is mean 0.4 * 1.2
    assert counting_pmf(RHO, 0.4 * 1.2, 2) == pytest.approx(0.4 * (0.2 / 1.2) * (1 / 1.2))


@pytest.mark.parametrize("spec", SPECS)
def test_counting_mean_is_alpha(spec):
    y = np.arange(600)
    pmf = counting_pmf(spec, 0.4, y)
    assert pmf @ y == pytest.approx(0.4, abs=1e-12)
    assert pmf @ y**2 - 0.16 == pytest.approx(variance_coeff(spec, 0.4), abs=1e-10)


def test_variance_coeff_examples():
    assert variance_coeff(BINOMIAL, 0.0) == 0.0
    assert variance_coeff(NEGBINOMIAL, 0.5) == pytest.approx(0.75)


def test_chf_examples(rng):
    assert counting_chf(BINOMIAL, 0.5, np.pi) == pytest.approx(0.0, abs=1e-15)
    u = rng.uniform(-np.pi, np.pi, 20)
    y = np.arange(201)
    series = (counting_pmf(NEGBINOMIAL, 0.5, y) * np.exp(1j * np.outer(u, y))).sum(axis=1)
    assert np.max(np.abs(series - counting_chf(NEGBINOMIAL, 0.5, u))) < 1e-10


def test_rho_chf_matches_series(rng):
    u = rng.uniform(-np.pi, np.pi, 20)
    y = np.arange(200)
    series = (counting_pmf(RHO, 0.4, y) * np.exp(1j * np.outer(u, y))).sum(axis=1)
    assert np.max(np.abs(series - counting_chf(RHO, 0.4, u))) < 1e-12


def test_thinned_pmf_examples():
    for spec in SPECS:
        assert thinned_pmf(spec, 0.4, 0, 0) == 1.0
    assert thinned_pmf(BINOMIAL, 0.5, 2, 1) == pytest.approx(0.5)
    z = np.arange(301)
    pmf = thinned_pmf(RHO, 0.4, 3, z)
    assert pmf.sum() == pytest.approx(1.0, abs=1e-10)
    assert np.max(np.abs(pmf - brute_convolution(RHO, 0.4, 3, 300))) < 1e-12


def test_table_matches_pointwise():
    for spec in SPECS:
        table = thinned_pmf_table(spec, 0.35, 6, 40)
        for x in range(7):
            assert np.allclose(table[x], thinned_pmf(spec, 0.35, x, np.arange(41)), atol=1e-14)


@settings(max_examples=1000)
@given(alpha=alphas, x=st.integers(0, 60), seed=st.integers(0, 2**32 - 1))
def test_property_empty_sum_identity(alpha, x, seed):
    rng = np.random.default_rng(seed)
    for spec in SPECS:
        assert thin(spec, alpha, 0, rng) == 0
    assert thin(BINOMIAL, 1.0, x, rng) == x
    assert thin(BINOMIAL, alpha, x, rng) <= x


@settings(max_examples=1000)
@given(alpha=alphas, u=st.floats(-10.0, 10.0), which=st.integers(0, 2))
def test_property_chf(alpha, u, which):
    spec = SPECS[which]
    assert counting_chf(spec, alpha, 0.0) == 1.0
    assert abs(counting_chf(spec, alpha, u)) <= 1.0 + 1e-12


@settings(max_examples=1000)
@given(alpha=st.floats(0.0, 0.95), x=st.integers(0, 30), which=st.integers(0, 2))
def test_property_thinned_pmf_normalised(alpha, x, which):
    spec = SPECS[which]
    z = np.arange(int(stats.nbinom.isf(1e-13, max(x, 1), 1 / (1 + 2 * alpha))) + 60)
    assert abs(thinned_pmf(spec, alpha, x, z).sum() - 1.0) < 1e-8


@settings(max_examples=200)
@given(alpha=st.floats(0.0, 0.9), x=st.integers(0, 5), which=st.integers(0, 2))
def test_property_thinned_pmf_is_convolution(alpha, x, which):
    spec = SPECS[which]
    z = np.arange(120)
    assert np.max(np.abs(thinned_pmf(spec, alpha, x, z) - brute_convolution(spec, alpha, x, 119))) < 1e-10
