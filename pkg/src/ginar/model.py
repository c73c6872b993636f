"""The GINAR(p) process ``X_t = sum_j alpha_j o X_{t-j} + eps_t``.

Closed-form moments follow from iterated expectations. The marginal variance
is ``(mu_X sum_j beta_j + sigma_eps^2) / (1 - sum_j alpha_j rho_X(j))``, i.e.
the whole numerator is divided. A form dividing only ``sigma_eps^2`` also
circulates; it disagrees with the Poisson(2) marginal of a Po-INAR(1) process
with ``alpha = 0.5, mu_eps = 1`` (it gives 1.833), so it is not used.
"""
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InvalidModelError, InvalidParameterError, NumericalError
from .innovations import InnovationSpec, innovation_sample
from .thinning import BINOMIAL, ThinningSpec, variance_coeff


@dataclass(frozen=True)
class SeasonalMeanModel:
    """``log mu_eps,t = b0 + b1 sin(2 pi t / period) + b2 cos(2 pi t / period)``."""

    b0: float
    b1: float = 0.0
    b2: float = 0.0
    period: float = 52.0

    def __post_init__(self):
        if not self.period > 0:
            raise InvalidParameterError(f"period must be positive, got {self.period}")


def seasonal_mu(seasonal, t):
    t = np.asarray(t, dtype=float)
    phase = 2.0 * np.pi * t / seasonal.period
    out = np.exp(seasonal.b0 + seasonal.b1 * np.sin(phase) + seasonal.b2 * np.cos(phase))
    return out[()] if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class GinarModel:
    alphas: tuple
    innovation: InnovationSpec
    thinning: ThinningSpec = field(default=BINOMIAL)

    def __post_init__(self):
        alphas = tuple(float(a) for a in np.atleast_1d(self.alphas))
        if not alphas:
            raise InvalidModelError("order p must be at least 1")
        if any(not 0.0 <= a < 1.0 for a in alphas):
            raise InvalidModelError(f"each alpha_j must lie in [0, 1), got {alphas}")
        if sum(alphas) >= 1.0:
            raise InvalidModelError(f"sum of alphas must be below 1, got {sum(alphas)}")
        object.__setattr__(self, "alphas", alphas)
        if not isinstance(self.innovation, InnovationSpec):
            raise InvalidModelError("innovation must be an InnovationSpec")

    @property
    def p(self):
        return len(self.alphas)

    @property
    def alpha_array(self):
        return np.asarray(self.alphas)

    def betas(self):
        return np.array([variance_coeff(self.thinning, a) for a in self.alphas])

    def simulate(self, n, rng, burnin=500, seasonal=None):
        return simulate(self, n, rng, burnin=burnin, seasonal=seasonal)

    def conditional_mean(self, lags):
        return conditional_mean(self, lags)

    def conditional_variance(self, lags):
        return conditional_variance(self, lags)

    def marginal_mean(self):
        return marginal_mean(self)

    def marginal_variance(self):
        return marginal_variance(self)

    def acf(self, maxlag):
        return acf(self, maxlag)

    def spectral_density(self, nu):
        return spectral_density(self, nu)


def simulate(model, n, rng, burnin=500, seasonal=None):
    """Simulate ``n`` counts after discarding ``burnin`` steps.

    The recursion starts from ``p`` innovation draws. With ``seasonal`` the
    innovation mean at retained step ``t = 1..n`` is ``seasonal_mu(t)``; burn-in
    steps use ``t <= 0``.
    """
    if n < 1 or burnin < 0:
        raise InvalidParameterError(f"need n >= 1 and burnin >= 0, got {n}, {burnin}")
    p = model.p
    total = n + burnin
    init = np.asarray(innovation_sample(model.innovation, rng, size=p), dtype=np.int64)
    U = rng.random((total, 2 * p + 1))
    if seasonal is None:
        mu = np.full(total, model.innovation.mu)
    else:
        mu = seasonal_mu(seasonal, np.arange(1 - burnin, n + 1))
    path = _kernels.simulate_path(U, model.alpha_array, model.thinning.code,
                                  model.thinning.rho_value, model.innovation.code,
                                  mu, model.innovation.r_value, init[::-1])
    return path[burnin:]


def _lags(model, lags):
    lags = np.asarray(lags, dtype=float)
    if lags.shape[-1] != model.p:
        raise InvalidParameterError(f"expected {model.p} lags, got {lags.shape[-1]}")
    return lags


def conditional_mean(model, lags):
    """``sum_j alpha_j x_{t-j} + mu_eps``; ``lags`` newest first."""
    return _lags(model, lags) @ model.alpha_array + model.innovation.mu


def conditional_variance(model, lags):
    return _lags(model, lags) @ model.betas() + model.innovation.variance()


def marginal_mean(model):
    return model.innovation.mu / (1.0 - sum(model.alphas))


def acf(model, maxlag):
    """Autocorrelations ``rho(0..maxlag)``.

    ``rho(1..p)`` solve the p-dimensional Yule-Walker system; later lags come
    from ``rho(k) = sum_j alpha_j rho(k - j)``.
    """
    if maxlag < 0:
        raise InvalidParameterError("maxlag must be non-negative")
    a = model.alpha_array
    p = model.p
    M = np.eye(p)
    rhs = np.zeros(p)
    for k in range(1, p + 1):
        for j in range(1, p + 1):
            m = abs(k - j)
            if m == 0:
                rhs[k - 1] += a[j - 1]
            else:
                M[k - 1, m - 1] -= a[j - 1]
    if np.linalg.cond(M) > 1e12:
        raise NumericalError("Yule-Walker system for the ACF is singular")
    head = np.linalg.solve(M, rhs)
    rho = np.empty(max(maxlag, p) + 1)
    rho[0] = 1.0
    rho[1:p + 1] = head
    for k in range(p + 1, maxlag + 1):
        rho[k] = a @ rho[k - 1::-1][:p]
    return rho[:maxlag + 1]


def spectral_numerator(model):
    """``sigma_eps^2 + mu_X sum_j beta_j``: the constant in the spectral density."""
    return model.innovation.variance() + marginal_mean(model) * model.betas().sum()


def marginal_variance(model):
    rho = acf(model, model.p)
    return spectral_numerator(model) / (1.0 - model.alpha_array @ rho[1:])


def transfer_sq(alphas, nu):
    """``|1 - sum_j alpha_j exp(-i nu j)|^2``."""
    nu = np.asarray(nu, dtype=float)
    j = np.arange(1, len(alphas) + 1)
    poly = 1.0 - np.exp(-1j * np.multiply.outer(nu, j)) @ np.asarray(alphas)
    return np.abs(poly) ** 2


def spectral_density(model, nu):
    """Spectral density on ``[-pi, pi]`` (integrates to the marginal variance)."""
    nu = np.asarray(nu, dtype=float)
    if np.any(np.abs(nu) > np.pi + 1e-12):
        raise InvalidParameterError("frequency must lie in [-pi, pi]")
    out = spectral_numerator(model) / (2.0 * np.pi * transfer_sq(model.alphas, nu))
    return out[()] if np.ndim(out) == 0 else out
