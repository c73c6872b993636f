"""Gaussian pseudo maximum likelihood.

The transition law is replaced by a normal density with the exact
conditional mean and variance. The criterion is the usual Gaussian
log-likelihood, with a minus sign on the quadratic term.
"""
import numpy as np

from ..transition import lag_matrix
from ._common import (FitOptions, FitResult, check_series, from_unconstrained,
                      interior_start, minimize, to_unconstrained)
from .moments import fit_yw


def pseudo_loglik(series, model):
    x = np.asarray(series, dtype=float)
    lags = lag_matrix(x.astype(np.int64), model.p)
    mean = lags @ model.alpha_array + model.innovation.mu
    var = lags @ model.betas() + model.innovation.variance()
    y = x[model.p:]
    return float(-0.5 * np.sum(np.log(2.0 * np.pi * var) + (y - mean) ** 2 / var))


def fit_pseudo(series, template, options=None):
    options = options or FitOptions()
    x = check_series(series, template.p + len(template.param_names) + 1)
    n_pos = 1 + template.has_r
    n_used = len(x) - template.p

    def objective(z):
        theta = from_unconstrained(z, template.p, n_pos)
        if theta[:template.p].sum() >= 1.0:
            return np.inf
        return -pseudo_loglik(x, template.model(theta)) / n_used

    if options.initial is not None:
        theta0 = np.asarray(options.initial, dtype=float)
    else:
        theta0 = interior_start(template, fit_yw(x, template).extras["unconstrained"], x.mean())
    z, fun, converged, iterations = minimize(objective, to_unconstrained(theta0, template.p, n_pos),
                                             options)
    theta = from_unconstrained(z, template.p, n_pos)
    flags = [] if converged else ["optimiser did not converge"]
    return FitResult("pseudo", template, theta, -fun * n_used, converged, iterations, n_used,
                     flags=flags)
