"""Generalized thinning operators ``alpha o X = Y_1 + ... + Y_X``.

Three counting-sequence families are supported:

``binomial``
    ``Y_k ~ Bernoulli(alpha)``; variance coefficient ``alpha (1 - alpha)``.
``negbinomial``
    ``Y_k`` geometric on ``{0, 1, ...}`` with pmf ``alpha^y / (1 + alpha)^(y+1)``;
    variance coefficient ``alpha (1 + alpha)``.
``rhobinomial``
    ``Y_k`` rho-Bernoulli: zero with probability ``1 - pi`` and otherwise a
    geometric variate on ``{1, 2, ...}`` with ratio ``q = rho / (1 + rho)``.

The rho-Bernoulli law with success probability ``pi`` has mean
``pi (1 + rho)`` (the positive part has mean ``1 / (1 - q) = 1 + rho``), so
``alpha`` here is the *mean* of the counting variate and the success
probability is ``pi = alpha / (1 + rho)``. This keeps ``E(alpha o X) = alpha E(X)``
for every family. With ``E(Y^2) = pi (1 + rho)(1 + 2 rho)`` the variance
coefficient is ``alpha (1 + 2 rho - alpha)``, which reduces to the binomial
one at ``rho = 0``.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special, stats

from . import _kernels
from .errors import InvalidParameterError


class ThinningFamily(str, Enum):
    BINOMIAL = "binomial"
    NEGBINOMIAL = "negbinomial"
    RHOBINOMIAL = "rhobinomial"


_CODES = {
    ThinningFamily.BINOMIAL: _kernels.THIN_BINOMIAL,
    ThinningFamily.NEGBINOMIAL: _kernels.THIN_NEGBIN,
    ThinningFamily.RHOBINOMIAL: _kernels.THIN_RHO,
}


@dataclass(frozen=True)
class ThinningSpec:
    """Counting-sequence family of a thinning operator.

    ``rho`` is only meaningful (and required) for the rho-binomial family.
    """

    family: ThinningFamily = ThinningFamily.BINOMIAL
    rho: float | None = None

    def __post_init__(self):
        family = ThinningFamily(self.family)
        object.__setattr__(self, "family", family)
        if family is ThinningFamily.RHOBINOMIAL:
            if self.rho is None or not 0.0 <= self.rho < 1.0:
                raise InvalidParameterError(f"rho must lie in [0, 1), got {self.rho}")
            object.__setattr__(self, "rho", float(self.rho))
        elif self.rho is not None:
            raise InvalidParameterError(f"rho is only valid for rho-binomial thinning")

    @property
    def code(self):
        return _CODES[self.family]

    @property
    def rho_value(self):
        return self.rho if self.rho is not None else 0.0


BINOMIAL = ThinningSpec(ThinningFamily.BINOMIAL)
NEGBINOMIAL = ThinningSpec(ThinningFamily.NEGBINOMIAL)


def _check_alpha(alpha):
    if not 0.0 <= alpha <= 1.0:
        raise InvalidParameterError(f"alpha must lie in [0, 1], got {alpha}")


def rho_success_prob(spec, alpha):
    """Probability that one rho-Bernoulli counting variate is non-zero."""
    return alpha / (1.0 + spec.rho_value)


def thin(spec, alpha, x, rng):
    """Draw ``alpha o x`` for a fixed count ``x``."""
    _check_alpha(alpha)
    x = int(x)
    if x < 0:
        raise InvalidParameterError(f"x must be non-negative, got {x}")
    if x == 0 or alpha == 0.0:
        return 0
    if spec.family is ThinningFamily.BINOMIAL:
        return int(rng.binomial(x, alpha))
    if spec.family is ThinningFamily.NEGBINOMIAL:
        # x IID geometrics on {0, 1, ...} sum to NB(size x, success 1/(1+alpha))
        return int(rng.negative_binomial(x, 1.0 / (1.0 + alpha)))
    k = int(rng.binomial(x, rho_success_prob(spec, alpha)))
    if k == 0 or spec.rho_value == 0.0:
        return k
    return k + int(rng.negative_binomial(k, 1.0 / (1.0 + spec.rho_value)))


def counting_pmf(spec, alpha, y):
    """pmf of one counting variate ``Y_k`` at ``y`` (vectorised over ``y``)."""
    _check_alpha(alpha)
    y = np.asarray(y)
    if spec.family is ThinningFamily.BINOMIAL:
        out = stats.bernoulli.pmf(y, alpha)
    elif spec.family is ThinningFamily.NEGBINOMIAL:
        out = stats.geom.pmf(y + 1, 1.0 / (1.0 + alpha))
    else:
        pi = rho_success_prob(spec, alpha)
        q = spec.rho / (1.0 + spec.rho)
        pos = pi * stats.geom.pmf(y, 1.0 - q)
        out = np.where(y == 0, 1.0 - pi, pos)
    return out[()] if np.ndim(out) == 0 else out


def log_counting_chf(spec, alpha, u):
    """Principal log of the counting chf; only integer multiples are exponentiated."""
    eiu = np.exp(1j * np.asarray(u, dtype=float))
    if spec.family is ThinningFamily.BINOMIAL:
        return np.log(1.0 - alpha + alpha * eiu)
    if spec.family is ThinningFamily.NEGBINOMIAL:
        return -np.log(1.0 + alpha - alpha * eiu)
    pi = rho_success_prob(spec, alpha)
    q = spec.rho / (1.0 + spec.rho)
    return np.log(1.0 - pi + pi * eiu * (1.0 - q) / (1.0 - q * eiu))


def counting_chf(spec, alpha, u):
    """``E exp(i u Y)`` for one counting variate."""
    _check_alpha(alpha)
    eiu = np.exp(1j * np.asarray(u, dtype=float))
    if spec.family is ThinningFamily.BINOMIAL:
        out = 1.0 - alpha + alpha * eiu
    elif spec.family is ThinningFamily.NEGBINOMIAL:
        out = 1.0 / (1.0 + alpha - alpha * eiu)
    else:
        pi = rho_success_prob(spec, alpha)
        q = spec.rho / (1.0 + spec.rho)
        out = 1.0 - pi + pi * eiu * (1.0 - q) / (1.0 - q * eiu)
    # exact normalisation; the formulas above can round to 1 +/- ulp at u = 0
    out = np.where(np.asarray(u) == 0.0, 1.0 + 0.0j, out)
    return out[()] if np.ndim(out) == 0 else out


def variance_coeff(spec, alpha):
    """Variance ``beta`` of one counting variate."""
    _check_alpha(alpha)
    if spec.family is ThinningFamily.BINOMIAL:
        return alpha * (1.0 - alpha)
    if spec.family is ThinningFamily.NEGBINOMIAL:
        return alpha * (1.0 + alpha)
    return alpha * (1.0 + 2.0 * spec.rho - alpha)


def _binom_pmf(z, n, p):
    # log-space form; scipy's binom.pmf overflows for subnormal p
    z = np.asarray(z)
    n = np.asarray(n)
    inside = (z >= 0) & (z <= n)
    zc = np.clip(z, 0, n)
    logp = (special.gammaln(n + 1) - special.gammaln(zc + 1) - special.gammaln(n - zc + 1)
            + special.xlogy(zc, p) + special.xlog1py(n - zc, -p))
    return np.where(inside, np.exp(logp), 0.0)


def _rho_thinned_pmf(spec, alpha, x, z):
    pi = rho_success_prob(spec, alpha)
    q = spec.rho / (1.0 + spec.rho)
    z = np.asarray(z)
    k = np.arange(x + 1)
    weights = _binom_pmf(k, x, pi)
    zz = z[..., None]
    kk = k[(None,) * z.ndim]
    # k successes, each geometric on {1, 2, ...}: z - k failures of NB(k, 1 - q)
    with np.errstate(invalid="ignore"):
        given_k = np.where(kk == 0, (zz == 0).astype(float),
                           stats.nbinom.pmf(zz - kk, np.maximum(kk, 1), 1.0 - q))
    return (given_k * weights).sum(axis=-1)


def thinned_pmf(spec, alpha, x, z):
    """``P(alpha o X = z | X = x)`` (vectorised over ``z``)."""
    _check_alpha(alpha)
    x = int(x)
    z = np.asarray(z)
    if x == 0:
        out = (z == 0).astype(float)
    elif spec.family is ThinningFamily.BINOMIAL:
        out = _binom_pmf(z, x, alpha)
    elif spec.family is ThinningFamily.NEGBINOMIAL:
        out = stats.nbinom.pmf(z, x, 1.0 / (1.0 + alpha))
    else:
        out = _rho_thinned_pmf(spec, alpha, x, z)
    return out[()] if np.ndim(out) == 0 else out


def thinned_pmf_table(spec, alpha, max_x, max_z):
    """Rows ``P(alpha o l = z)`` for ``l <= max_x`` and ``z <= max_z``."""
    z = np.arange(max_z + 1)
    table = np.empty((max_x + 1, max_z + 1))
    table[0] = z == 0
    if max_x == 0:
        return table
    lags = np.arange(1, max_x + 1)[:, None]
    if spec.family is ThinningFamily.BINOMIAL:
        table[1:] = _binom_pmf(z, lags, alpha)
    elif spec.family is ThinningFamily.NEGBINOMIAL:
        table[1:] = stats.nbinom.pmf(z, lags, 1.0 / (1.0 + alpha))
    else:
        for lag in range(1, max_x + 1):
            table[lag] = _rho_thinned_pmf(spec, alpha, lag, z)
    return table
