"""Saddlepoint approximation to the conditional likelihood (binomial thinning).

For each ``t`` the conditional cgf is
``K_t(u) = sum_j x_{t-j} log(1 - alpha_j + alpha_j e^u) + K_eps(u)`` and the
log-density at ``x_t`` is ``-log(2 pi K_t''(u_t))/2 + K_t(u_t) - u_t x_t`` where
``K_t'(u_t) = x_t``. Zero counts have no finite saddlepoint; their exact
probability ``prod_j (1 - alpha_j)^{x_{t-j}} P(eps = 0)`` is used instead.
The resulting estimator is known to be inconsistent.
"""
import numpy as np

from .. import _kernels
from ..errors import UnsupportedMethodError
from ..thinning import ThinningFamily
from ..transition import lag_matrix
from ._common import (FitOptions, FitResult, check_series, from_unconstrained,
                      interior_start, minimize, to_unconstrained)
from .moments import fit_yw


def saddle_terms(series, model, tol=1e-10):
    """Per-point log-densities and the mask of points whose solve converged."""
    if model.thinning.family is not ThinningFamily.BINOMIAL:
        raise UnsupportedMethodError("the saddlepoint likelihood needs binomial thinning")
    x = np.asarray(series, dtype=np.int64)
    return _kernels.saddle_logdens(x[model.p:], lag_matrix(x, model.p), model.alpha_array,
                                   model.innovation.code, model.innovation.mu,
                                   model.innovation.r_value, tol=tol)


def saddle_loglik(series, model):
    logd, ok = saddle_terms(series, model)
    return float(logd[ok].sum()), int((~ok).sum())


def fit_saddlepoint(series, template, options=None):
    if template.thinning.family is not ThinningFamily.BINOMIAL:
        raise UnsupportedMethodError("the saddlepoint likelihood needs binomial thinning")
    options = options or FitOptions()
    x = check_series(series, template.p + len(template.param_names) + 1)
    n_pos = 1 + template.has_r
    n_used = len(x) - template.p

    def objective(z):
        theta = from_unconstrained(z, template.p, n_pos)
        if theta[:template.p].sum() >= 1.0:
            return np.inf
        return -saddle_loglik(x, template.model(theta))[0] / n_used

    if options.initial is not None:
        theta0 = np.asarray(options.initial, dtype=float)
    else:
        theta0 = interior_start(template, fit_yw(x, template).extras["unconstrained"], x.mean())
    z, fun, converged, iterations = minimize(objective, to_unconstrained(theta0, template.p, n_pos),
                                             options)
    theta = from_unconstrained(z, template.p, n_pos)
    skipped = saddle_loglik(x, template.model(theta))[1]
    flags = [] if converged else ["optimiser did not converge"]
    if skipped:
        flags.append(f"{skipped} points skipped after saddlepoint solve failures")
    return FitResult("saddle", template, theta, -fun * n_used, converged, iterations, n_used,
                     flags=flags, extras={"skipped_points": skipped})
