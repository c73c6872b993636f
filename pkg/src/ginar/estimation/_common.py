"""Shared fitting machinery: templates, results, reparametrisation, optimiser."""
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from ..errors import InvalidParameterError, InvalidSeriesError
from ..innovations import InnovationFamily, InnovationSpec
from ..model import GinarModel, SeasonalMeanModel
from ..thinning import BINOMIAL, ThinningSpec

ALPHA_CAP = 0.999


@dataclass(frozen=True)
class ModelTemplate:
    """Model family and order; the parameter values are what gets estimated."""

    p: int
    innovation: InnovationFamily = InnovationFamily.POISSON
    thinning: ThinningSpec = field(default=BINOMIAL)

    def __post_init__(self):
        if self.p < 1:
            raise InvalidParameterError("order p must be at least 1")
        object.__setattr__(self, "innovation", InnovationFamily(self.innovation))

    @property
    def has_r(self):
        return self.innovation is InnovationFamily.NEGBINOMIAL

    @property
    def param_names(self):
        names = [f"alpha{j}" for j in range(1, self.p + 1)] + ["mu_eps"]
        return names + ["r"] if self.has_r else names

    def model(self, theta):
        theta = np.asarray(theta, dtype=float)
        r = theta[self.p + 1] if self.has_r else None
        innovation = InnovationSpec(self.innovation, theta[self.p], r)
        return GinarModel(tuple(theta[:self.p]), innovation, self.thinning)

    def theta(self, model):
        theta = list(model.alphas) + [model.innovation.mu]
        return np.array(theta + [model.innovation.r] if self.has_r else theta)

    @classmethod
    def of(cls, model):
        return cls(model.p, model.innovation.family, model.thinning)


@dataclass(frozen=True)
class FitOptions:
    max_iterations: int = 500
    gradient_tolerance: float = 1e-6
    transition_method: str = "davies"
    quad_nodes: int = 300
    initial: np.ndarray | None = None

    def __post_init__(self):
        if self.max_iterations < 1 or not self.gradient_tolerance > 0:
            raise InvalidParameterError("iteration limit and tolerance must be positive")


@dataclass
class FitResult:
    method: str
    template: ModelTemplate
    theta: np.ndarray
    objective: float
    converged: bool
    iterations: int
    n_used: int
    covariance: np.ndarray | None = None
    flags: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def param_names(self):
        names = self.extras.get("param_names")
        return list(names) if names is not None else self.template.param_names

    @property
    def params(self):
        return dict(zip(self.param_names, (float(v) for v in self.theta)))

    @property
    def k(self):
        return len(self.theta)

    def to_model(self):
        """A valid model at the estimate, clamping into the parameter space if needed."""
        if "seasonal_template" in self.extras:
            return self.extras["seasonal_template"].split(self.theta)[0]
        theta = clamp_theta(self.template, self.theta[:self.template.p + 1 + self.template.has_r])
        return self.template.model(theta)

    def with_covariance(self, covariance):
        return replace(self, covariance=covariance)


def clamp_theta(template, theta, alpha_min=0.0, alpha_cap=ALPHA_CAP, mu_min=1e-8,
                r_bounds=(1e-8, np.inf)):
    theta = np.array(theta, dtype=float)
    p = template.p
    a = np.clip(theta[:p], alpha_min, alpha_cap)
    if a.sum() > alpha_cap:
        a *= alpha_cap / a.sum()
    theta[:p] = a
    theta[p] = max(theta[p], mu_min)
    if template.has_r:
        theta[p + 1] = float(np.clip(theta[p + 1], *r_bounds))
    return theta


def check_series(series, min_length=2):
    x = np.asarray(series)
    if x.ndim != 1 or len(x) < min_length:
        raise InvalidSeriesError(f"need a 1-d series of length >= {min_length}")
    if not np.all(np.isfinite(x)) or np.any(x < 0) or np.any(x != np.round(x)):
        raise InvalidSeriesError("series must hold non-negative integers")
    return x.astype(np.int64)


# alpha = softmax over (z_1..z_p, 0) without the slack entry: an open-simplex bijection

def alphas_from_z(z):
    z = np.asarray(z, dtype=float)
    m = max(0.0, z.max())
    e = np.exp(z - m)
    return e / (np.exp(-m) + e.sum())


def z_from_alphas(alphas):
    a = np.asarray(alphas, dtype=float)
    return np.log(a) - np.log1p(-a.sum())


def to_unconstrained(theta, p, n_positive):
    theta = np.asarray(theta, dtype=float)
    return np.concatenate([z_from_alphas(theta[:p]), np.log(theta[p:p + n_positive]),
                           theta[p + n_positive:]])


def from_unconstrained(z, p, n_positive):
    z = np.asarray(z, dtype=float)
    return np.concatenate([alphas_from_z(z[:p]), np.exp(z[p:p + n_positive]),
                           z[p + n_positive:]])


def interior_start(template, theta, series_mean):
    """Clamp a pilot estimate (usually Yule-Walker) into the interior."""
    p = template.p
    theta = np.array(theta, dtype=float)
    a = np.clip(theta[:p], 0.02, 0.9)
    if a.sum() > 0.9:
        a *= 0.9 / a.sum()
    theta[:p] = a
    theta[p] = max(theta[p], 0.05 * max(series_mean, 1.0))
    if template.has_r:
        theta[p + 1] = float(np.clip(theta[p + 1], 0.05, 10.0))
    return theta


def central_gradient(f, z, h=1e-5):
    g = np.empty_like(z)
    for i in range(len(z)):
        e = np.zeros_like(z)
        e[i] = h
        g[i] = (f(z + e) - f(z - e)) / (2.0 * h)
    return g


def minimize(f, z0, options):
    """Nelder-Mead search refined by BFGS, both on the unconstrained scale.

    ``f`` should be a per-observation objective so that the gradient
    tolerance is scale free. Returns ``(z, fun, converged, iterations)``.
    """
    z0 = np.asarray(z0, dtype=float)

    def safe(z):
        val = f(z)
        return val if np.isfinite(val) else 1e300

    nm = optimize.minimize(safe, z0, method="Nelder-Mead",
                           options={"maxiter": options.max_iterations,
                                    "xatol": 1e-4, "fatol": 1e-9})
    grad = lambda z: central_gradient(safe, z)
    qn = optimize.minimize(safe, nm.x, jac=grad, method="BFGS",
                           options={"maxiter": options.max_iterations,
                                    "gtol": options.gradient_tolerance})
    if qn.fun <= nm.fun:
        z, fun = qn.x, qn.fun
    else:
        z, fun = nm.x, nm.fun
    gnorm = np.max(np.abs(grad(z)))
    converged = bool(np.isfinite(fun) and gnorm < 10 * options.gradient_tolerance)
    return z, float(fun), converged, int(nm.nit + qn.nit)
