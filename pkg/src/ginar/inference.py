"""Covariance estimates, confidence sets, information criteria and residual checks.

Covariance matrices here are for the estimator itself (already divided by
the sample size), so a standard error is the square root of a diagonal entry.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import GinarError, NumericalError, UnsupportedMethodError
from .estimation import LIKELIHOOD_METHODS, FitOptions, fit
from .estimation.cml import cml_score_hessian
from .model import conditional_mean, conditional_variance
from .transition import lag_matrix

OBSERVED_INFORMATION = "observed-information"
SANDWICH = "sandwich"
PARAMETRIC_BOOTSTRAP = "parametric-bootstrap"
MAX_BOOTSTRAP_FAILURE = 0.10


@dataclass(frozen=True)
class CovarianceEstimate:
    matrix: np.ndarray
    source: str
    bootstrap_reps: int | None = None
    failures: int = 0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", 0.5 * (m + m.T))

    @property
    def standard_errors(self):
        return np.sqrt(np.clip(np.diag(self.matrix), 0.0, None))


def _fit_options(fit_result):
    return FitOptions(transition_method=fit_result.extras.get("transition_method", "davies"),
                      quad_nodes=fit_result.extras.get("quad_nodes", 300))


def cml_covariance(series, fit_result, kind=OBSERVED_INFORMATION):
    """Inverse observed information, or the sandwich ``J^-1 K J^-1``.

    ``J`` is minus the Hessian of the log-likelihood and ``K`` the sum of outer
    products of per-observation scores.
    """
    if fit_result.method != "cml":
        raise UnsupportedMethodError("analytic covariance is available for CML fits only")
    _, hessian, scores = cml_score_hessian(series, fit_result.template, fit_result.theta,
                                           _fit_options(fit_result))
    J = -hessian
    if not np.all(np.isfinite(J)) or np.linalg.cond(J) > 1e12:
        raise NumericalError("observed information is not invertible")
    J_inv = np.linalg.inv(J)
    if kind == OBSERVED_INFORMATION:
        return CovarianceEstimate(J_inv, kind)
    if kind == SANDWICH:
        K = scores.T @ scores
        return CovarianceEstimate(J_inv @ K @ J_inv, kind)
    raise UnsupportedMethodError(f"unknown covariance kind {kind!r}")


def _refit(model, n, method, template, options, seed, index):
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    series = model.simulate(n, rng)
    try:
        result = fit(series, template, method, options)
    except (GinarError, ArithmeticError, np.linalg.LinAlgError):
        return None
    theta = np.asarray(result.theta, dtype=float)
    return theta if np.all(np.isfinite(theta)) else None


def bootstrap_covariance(series, fit_result, B=200, seed=0, threads=1):
    """Parametric bootstrap: refit on ``B`` series simulated from the fitted model.

    Replicate ``i`` draws from ``SeedSequence([seed, i])``, so the result does
    not depend on ``threads``.
    """
    if B < 2:
        raise ValueError("need at least two bootstrap replicates")
    if fit_result.method not in ("cml", "yw", "cls", "pseudo", "whittle", "saddle"):
        raise UnsupportedMethodError(f"cannot bootstrap method {fit_result.method!r}")
    model = fit_result.to_model()
    n = len(series)
    options = _fit_options(fit_result)
    args = (model, n, fit_result.method, fit_result.template, options, seed)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            draws = list(pool.map(lambda i: _refit(*args, i), range(B)))
    else:
        draws = [_refit(*args, i) for i in range(B)]
    ok = [d for d in draws if d is not None]
    failures = B - len(ok)
    if failures > MAX_BOOTSTRAP_FAILURE * B or len(ok) < 2:
        raise NumericalError(f"{failures} of {B} bootstrap refits failed")
    matrix = np.atleast_2d(np.cov(np.array(ok), rowvar=False))
    return CovarianceEstimate(matrix, PARAMETRIC_BOOTSTRAP, B, failures)


def _matrix(covariance):
    return np.atleast_2d(np.asarray(getattr(covariance, "matrix", covariance), dtype=float))


def confidence_interval(fit_result, covariance, level=0.95):
    """``theta_j +/- z * sqrt(cov_jj)`` as a dict of ``(lower, upper)``."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    z = stats.norm.ppf(0.5 + level / 2.0)
    se = np.sqrt(np.clip(np.diag(_matrix(covariance)), 0.0, None))
    theta = np.asarray(fit_result.theta, dtype=float)
    return {name: (float(t - z * s), float(t + z * s))
            for name, t, s in zip(fit_result.param_names, theta, se)}


@dataclass(frozen=True)
class ConfidenceRegion:
    """Ellipsoid ``(theta - centre)' C^-1 (theta - centre) <= chi2_k(level)``."""

    centre: np.ndarray
    precision: np.ndarray
    threshold: float

    def distance(self, theta):
        d = np.asarray(theta, dtype=float) - self.centre
        return float(d @ self.precision @ d)

    def contains(self, theta):
        return self.distance(theta) <= self.threshold


def confidence_region(fit_result, covariance, level=0.95):
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    C = _matrix(covariance)
    precision = np.linalg.pinv(C, hermitian=True)
    return ConfidenceRegion(np.asarray(fit_result.theta, dtype=float), precision,
                            float(stats.chi2.ppf(level, C.shape[0])))


def information_criteria(fit_result):
    if fit_result.method not in LIKELIHOOD_METHODS:
        raise UnsupportedMethodError(
            f"information criteria need a likelihood fit, not {fit_result.method!r}")
    loglik = fit_result.objective
    k = fit_result.k
    return {"aic": -2.0 * loglik + 2.0 * k,
            "bic": -2.0 * loglik + k * np.log(fit_result.n_used)}


def pearson_residuals(model, series):
    """``(x_t - E[X_t | past]) / sqrt(Var[X_t | past])`` for ``t > p``."""
    if hasattr(model, "to_model"):
        model = model.to_model()
    x = np.asarray(series, dtype=np.int64)
    lags = lag_matrix(x, model.p)
    mean = conditional_mean(model, lags)
    var = conditional_variance(model, lags)
    return (x[model.p:] - mean) / np.sqrt(var)


def ljung_box(residuals, lags=20):
    """Ljung-Box ``Q`` and its chi-square(``lags``) p-value."""
    e = np.asarray(residuals, dtype=float)
    n = len(e)
    if not 1 <= lags < n:
        raise ValueError("need 1 <= lags < number of residuals")
    d = e - e.mean()
    denom = d @ d
    if denom == 0:
        rho = np.zeros(lags)
    else:
        rho = np.array([d[:n - k] @ d[k:] for k in range(1, lags + 1)]) / denom
    q = float(n * (n + 2) * np.sum(rho**2 / (n - np.arange(1, lags + 1))))
    return q, float(stats.chi2.sf(q, lags))
