"""Conditional maximum likelihood, including a seasonal innovation mean."""
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, InvalidParameterError
from ..innovations import InnovationFamily, InnovationSpec
from ..model import GinarModel, SeasonalMeanModel, seasonal_mu
from ..thinning import BINOMIAL, ThinningFamily, ThinningSpec
from .. import transition as tr
from ._common import (FitOptions, FitResult, ModelTemplate, check_series,
                      from_unconstrained, interior_start, minimize, to_unconstrained,
                      alphas_from_z, z_from_alphas)
from .moments import fit_yw


def transition_probs(series, model, options=None, mu=None):
    options = options or FitOptions()
    rule = tr.default_rule(options.quad_nodes)
    return tr.series_probs(model, series, options.transition_method, rule, mu)


def cml_loglik(series, model, options=None):
    """``sum_{t>p} log b(x_t)`` with probabilities floored at 1e-300."""
    return float(np.sum(tr.safe_log(transition_probs(series, model, options))))


def _start(x, template, options):
    if options.initial is not None:
        return np.asarray(options.initial, dtype=float)
    pilot = fit_yw(x, template)
    return interior_start(template, pilot.extras["unconstrained"], x.mean())


def fit_cml(series, template, options=None):
    """Maximise the conditional log-likelihood over ``(alpha, mu_eps[, r])``."""
    options = options or FitOptions()
    x = check_series(series, template.p + len(template.param_names) + 1)
    n_pos = 1 + template.has_r
    n_used = len(x) - template.p

    def objective(z):
        theta = from_unconstrained(z, template.p, n_pos)
        if theta[:template.p].sum() >= 1.0:
            return np.inf
        return -cml_loglik(x, template.model(theta), options) / n_used

    z0 = to_unconstrained(_start(x, template, options), template.p, n_pos)
    z, fun, converged, iterations = minimize(objective, z0, options)
    theta = from_unconstrained(z, template.p, n_pos)
    flags = [] if converged else ["optimiser did not converge"]
    return FitResult("cml", template, theta, -fun * n_used, converged, iterations,
                     n_used, flags=flags,
                     extras={"transition_method": options.transition_method,
                             "quad_nodes": options.quad_nodes})


# ---------------------------------------------------------------------------
# derivatives of the log-likelihood
# ---------------------------------------------------------------------------

def _steps(template, theta, rel=1e-4):
    h = rel * np.maximum(1.0, np.abs(theta))
    p = template.p
    # keep every perturbed point inside the parameter space
    room = np.concatenate([np.minimum(theta[:p], 1.0 - theta[:p].sum()),
                           theta[p:]])
    h = np.minimum(h, 0.25 * room)
    if np.any(h < 1e-8):
        raise DomainError("finite-difference step underflow: estimate on the boundary")
    return h


def cml_score_hessian(series, template, theta, options=None, rel_step=1e-4):
    """Gradient, Hessian and per-observation scores of the log-likelihood.

    Derivatives of each ``b(x_t)`` come from central differences in the
    natural parameters and are assembled as ``sum b'/b`` and
    ``sum (b b'' - b' b'^T) / b^2``. The mixed-difference stencil is symmetric
    in ``(j, k)``, so the Hessian is symmetric by construction.
    """
    x = check_series(series, template.p + 2)
    theta = np.asarray(theta, dtype=float)
    k = len(theta)
    h = _steps(template, theta, rel_step)
    probs = lambda th: transition_probs(x, template.model(th), options)
    b0 = probs(theta)
    E = np.diag(h)
    plus = [probs(theta + E[j]) for j in range(k)]
    minus = [probs(theta - E[j]) for j in range(k)]
    db = np.array([(plus[j] - minus[j]) / (2.0 * h[j]) for j in range(k)])
    d2b = np.empty((k, k, len(b0)))
    for j in range(k):
        d2b[j, j] = (plus[j] - 2.0 * b0 + minus[j]) / h[j] ** 2
        for i in range(j + 1, k):
            pp = probs(theta + E[j] + E[i])
            pm = probs(theta + E[j] - E[i])
            mp = probs(theta - E[j] + E[i])
            mm = probs(theta - E[j] - E[i])
            d2b[j, i] = d2b[i, j] = (pp - pm - mp + mm) / (4.0 * h[j] * h[i])
    b = np.maximum(b0, 1e-300)
    scores = (db / b).T
    gradient = scores.sum(axis=0)
    hessian = np.einsum("jkt->jk", d2b / b) - scores.T @ scores
    hessian = 0.5 * (hessian + hessian.T)
    return gradient, hessian, scores


# ---------------------------------------------------------------------------
# seasonal innovation mean
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeasonalTemplate:
    """GINAR(p) whose innovation mean follows a yearly sinusoid in ``t``."""

    p: int
    innovation: InnovationFamily = InnovationFamily.POISSON
    thinning: ThinningSpec = BINOMIAL
    period: float = 52.0

    def __post_init__(self):
        object.__setattr__(self, "innovation", InnovationFamily(self.innovation))
        if self.thinning.family is ThinningFamily.RHOBINOMIAL:
            raise InvalidParameterError("seasonal fits support binomial or negative binomial thinning")

    @property
    def has_r(self):
        return self.innovation is InnovationFamily.NEGBINOMIAL

    @property
    def param_names(self):
        names = [f"alpha{j}" for j in range(1, self.p + 1)] + ["b0", "b1", "b2"]
        return names + ["r"] if self.has_r else names

    def base(self):
        return ModelTemplate(self.p, self.innovation, self.thinning)

    def split(self, theta):
        theta = np.asarray(theta, dtype=float)
        p = self.p
        r = theta[p + 3] if self.has_r else None
        seasonal = SeasonalMeanModel(theta[p], theta[p + 1], theta[p + 2], self.period)
        model = GinarModel(tuple(theta[:p]), InnovationSpec(self.innovation, np.exp(theta[p]), r),
                           self.thinning)
        return model, seasonal

    def mu_path(self, seasonal, n):
        """Innovation means for ``t = p+1 .. n`` (one-based time)."""
        return seasonal_mu(seasonal, np.arange(self.p + 1, n + 1))


def seasonal_loglik(series, template, theta, options=None):
    options = options or FitOptions()
    x = np.asarray(series, dtype=np.int64)
    model, seasonal = template.split(theta)
    mu = template.mu_path(seasonal, len(x))
    rule = tr.default_rule(options.quad_nodes)
    return float(np.sum(tr.safe_log(tr.series_probs(model, x, tr.DAVIES, rule, mu))))


def _seasonal_z(template, theta):
    p = template.p
    z = [z_from_alphas(theta[:p]), theta[p:p + 3]]
    if template.has_r:
        z.append([np.log(theta[p + 3])])
    return np.concatenate(z)


def _seasonal_theta(template, z):
    p = template.p
    theta = [alphas_from_z(z[:p]), z[p:p + 3]]
    if template.has_r:
        theta.append([np.exp(z[p + 3])])
    return np.concatenate(theta)


def fit_cml_seasonal(series, template, options=None):
    """CML with ``log mu_eps,t = b0 + b1 sin(2 pi t/P) + b2 cos(2 pi t/P)``.

    Always uses the Davies transition route, which takes a per-time innovation
    mean without extra work.
    """
    options = options or FitOptions()
    x = check_series(series, template.p + len(template.param_names) + 1)
    n_used = len(x) - template.p
    if options.initial is not None:
        theta0 = np.asarray(options.initial, dtype=float)
    else:
        base = template.base()
        pilot = interior_start(base, fit_yw(x, base).extras["unconstrained"], x.mean())
        theta0 = np.concatenate([pilot[:template.p], [np.log(pilot[template.p]), 0.0, 0.0],
                                 pilot[template.p + 1:]])

    def objective(z):
        theta = _seasonal_theta(template, z)
        return -seasonal_loglik(x, template, theta, options) / n_used

    z, fun, converged, iterations = minimize(objective, _seasonal_z(template, theta0), options)
    theta = _seasonal_theta(template, z)
    model, seasonal = template.split(theta)
    flags = [] if converged else ["optimiser did not converge"]
    return FitResult("cml-seasonal", template.base(), theta, -fun * n_used, converged,
                     iterations, n_used, flags=flags,
                     extras={"param_names": template.param_names, "seasonal": seasonal,
                             "seasonal_template": template,
                             "transition_method": tr.DAVIES,
                             "quad_nodes": options.quad_nodes})
