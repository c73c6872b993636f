"""Innovation distributions, parametrised by their mean.

The negative binomial family takes ``(mu, r)`` with variance ``mu + r mu^2``.
Internally that is size ``k = 1/r`` and "failure" probability
``q = mu / (k + mu)``, so ``P(x) = C(x+k-1, x) (1-q)^k q^x``. The geometric
family is the ``k = 1`` member: ``P(x) = mu^x / (1 + mu)^(x+1)``.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import stats

from . import _kernels
from .errors import DomainError, InvalidParameterError


class InnovationFamily(str, Enum):
    POISSON = "poisson"
    NEGBINOMIAL = "negbinomial"
    GEOMETRIC = "geometric"


_CODES = {
    InnovationFamily.POISSON: _kernels.INNOV_POISSON,
    InnovationFamily.NEGBINOMIAL: _kernels.INNOV_NEGBIN,
    InnovationFamily.GEOMETRIC: _kernels.INNOV_GEOMETRIC,
}


@dataclass(frozen=True)
class InnovationSpec:
    family: InnovationFamily
    mu: float
    r: float | None = None

    def __post_init__(self):
        family = InnovationFamily(self.family)
        object.__setattr__(self, "family", family)
        if not self.mu > 0:
            raise InvalidParameterError(f"innovation mean must be positive, got {self.mu}")
        object.__setattr__(self, "mu", float(self.mu))
        if family is InnovationFamily.NEGBINOMIAL:
            if self.r is None or not self.r > 0:
                raise InvalidParameterError(
                    f"negative binomial innovations need r > 0, got {self.r}")
            object.__setattr__(self, "r", float(self.r))
        elif self.r is not None:
            raise InvalidParameterError("r is only valid for negative binomial innovations")

    @property
    def code(self):
        return _CODES[self.family]

    @property
    def r_value(self):
        return self.r if self.r is not None else 0.0

    def with_mu(self, mu):
        return InnovationSpec(self.family, mu, self.r)

    def mean(self):
        return self.mu

    def variance(self):
        if self.family is InnovationFamily.POISSON:
            return self.mu
        if self.family is InnovationFamily.NEGBINOMIAL:
            return self.mu + self.r * self.mu**2
        return self.mu * (1.0 + self.mu)


def _size_q(spec, mu=None):
    mu = spec.mu if mu is None else mu
    size = 1.0 / spec.r if spec.family is InnovationFamily.NEGBINOMIAL else 1.0
    return size, mu / (size + mu)


def innovation_pmf(spec, x, mu=None):
    """pmf at ``x``; ``mu`` overrides the spec mean (time-varying models)."""
    x = np.asarray(x)
    mu = spec.mu if mu is None else np.asarray(mu, dtype=float)
    if spec.family is InnovationFamily.POISSON:
        out = stats.poisson.pmf(x, mu)
    else:
        size, q = _size_q(spec, mu)
        out = stats.nbinom.pmf(x, size, 1.0 - q)
    return out[()] if np.ndim(out) == 0 else out


def log_innovation_chf(spec, u, mu=None):
    """Log chf; broadcasts ``mu`` (shape ``(m, 1)``) against ``u``."""
    eiu = np.exp(1j * np.asarray(u, dtype=float))
    mu = spec.mu if mu is None else np.asarray(mu, dtype=float)
    if spec.family is InnovationFamily.POISSON:
        return mu * (eiu - 1.0)
    size, q = _size_q(spec, mu)
    # Re(1 - q e^{iu}) > 0, so the principal log is continuous here
    return size * (np.log1p(-q) - np.log(1.0 - q * eiu))


def innovation_chf(spec, u):
    out = np.exp(log_innovation_chf(spec, u))
    out = np.where(np.asarray(u) == 0.0, 1.0 + 0.0j, out)
    return out[()] if np.ndim(out) == 0 else out


def innovation_cgf(spec, u):
    """Cumulant generating function and its first two derivatives at ``u``.

    Returns ``(K, K', K'')``. Negative binomial and geometric laws need
    ``exp(u) < 1/q``; beyond that a :class:`DomainError` is raised.
    """
    u = np.asarray(u, dtype=float)
    eu = np.exp(u)
    mu = spec.mu
    if spec.family is InnovationFamily.POISSON:
        K = mu * (eu - 1.0)
        return K, mu * eu, mu * eu
    size, q = _size_q(spec)
    if np.any(u >= -np.log(q)):
        raise DomainError(f"cgf undefined for u >= {-np.log(q):.6g}")
    den = 1.0 - q * eu
    K = size * (np.log1p(-q) - np.log(den))
    return K, size * q * eu / den, size * q * eu / den**2


def innovation_sample(spec, rng, size=None):
    """One draw (or ``size`` draws) from the innovation law."""
    if spec.family is InnovationFamily.POISSON:
        out = rng.poisson(spec.mu, size=size)
    else:
        k, q = _size_q(spec)
        out = rng.negative_binomial(k, 1.0 - q, size=size)
    return int(out) if size is None else out


def pmf_support_limit(spec, tail=1e-14, mu=None):
    """Smallest ``x`` whose upper tail mass is below ``tail``."""
    mu = spec.mu if mu is None else float(np.max(mu))
    if spec.family is InnovationFamily.POISSON:
        return int(stats.poisson.isf(tail, mu)) + 1
    size, q = _size_q(spec, mu)
    return int(stats.nbinom.isf(tail, size, 1.0 - q)) + 1
