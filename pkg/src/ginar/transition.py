"""Transition probabilities ``b(x) = P(X_t = x | X_{t-1}, ..., X_{t-p})``.

Two routes are provided. The exact route convolves the thinned-count pmfs
with the innovation pmf. The Davies route inverts the conditional chf

    phi(u) = phi_eps(u) * prod_j phi_Y_j(u) ** x_{t-j}

with Gauss-Legendre quadrature on ``(0, pi)``:

    b(x) = (1/pi) int_0^pi Re(phi(u) exp(-iux)) du               (x >= 1)
    a(x) = P(X_t < x) = 1/2 - (1/pi) int_0^pi Re(phi(u) exp(-iux) / (1 - exp(-iu))) du

and ``b(0) = a(1)``. Both integrands are even in ``u`` (``phi(-u)`` is the
conjugate of ``phi(u)``), which justifies the half range. The cdf integrand
has a removable singularity at ``u = 0``; Gauss nodes never touch the
endpoints, so rules that include endpoints must not be used here.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidParameterError
from .innovations import innovation_pmf, log_innovation_chf, pmf_support_limit
from .thinning import log_counting_chf, thinned_pmf_table

LOG_FLOOR = np.log(1e-300)
EXACT, DAVIES = "exact", "davies"


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def count(self):
        return len(self.nodes)


def gauss_legendre(count=300, lower=0.0, upper=np.pi):
    """Gauss-Legendre rule mapped to ``(lower, upper)``."""
    if count < 1:
        raise InvalidParameterError("quadrature needs at least one node")
    x, w = np.polynomial.legendre.leggauss(count)
    half = 0.5 * (upper - lower)
    return QuadratureRule(lower + half * (x + 1.0), half * w)


_DEFAULT_RULES = {}


def default_rule(count=300):
    if count not in _DEFAULT_RULES:
        _DEFAULT_RULES[count] = gauss_legendre(count)
    return _DEFAULT_RULES[count]


def lag_matrix(series, p):
    """Rows ``(x_{t-1}, ..., x_{t-p})`` for ``t = p .. n-1`` (zero-based)."""
    x = np.asarray(series, dtype=np.int64)
    n = len(x)
    return np.column_stack([x[p - j:n - j] for j in range(1, p + 1)])


def _mu_rows(model, mu):
    if mu is None:
        return np.array([[model.innovation.mu]])
    return np.asarray(mu, dtype=float).reshape(-1, 1)


def log_phi_components(model, nodes, mu=None):
    log_y = np.array([log_counting_chf(model.thinning, a, nodes) for a in model.alphas])
    log_eps = log_innovation_chf(model.innovation, nodes[None, :], _mu_rows(model, mu))
    return log_y, np.atleast_2d(log_eps)


def transition_chf(model, u, lags, mu=None):
    """Conditional chf at ``u``; ``mu`` overrides the innovation mean."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    lags = np.asarray(lags)
    if lags.shape != (model.p,):
        raise InvalidParameterError(f"expected {model.p} lags")
    log_y, log_eps = log_phi_components(model, u, mu)
    out = np.exp(log_eps[0] + lags @ log_y)
    return out[0] if out.size == 1 else out


def davies_series_probs(model, x, lags, rule, mu=None, clamp=True):
    """Davies probabilities ``b(x_t)`` for aligned arrays ``x`` and ``lags``.

    With a constant innovation mean, repeated ``(x, lags)`` rows are
    evaluated once.
    """
    log_y, log_eps = log_phi_components(model, rule.nodes, mu)
    x = np.asarray(x, dtype=np.int64)
    lags = np.asarray(lags, dtype=np.int64)
    if log_eps.shape[0] == 1 and len(x) > 1:
        rows, inverse = np.unique(np.column_stack([x, lags]), axis=0, return_inverse=True)
        b = _kernels.davies_probs(np.ascontiguousarray(rows[:, 0]),
                                  np.ascontiguousarray(rows[:, 1:]), log_y, log_eps,
                                  rule.nodes, rule.weights)[inverse.ravel()]
    else:
        b = _kernels.davies_probs(x, lags, log_y, log_eps, rule.nodes, rule.weights)
    return np.clip(b, 0.0, 1.0) if clamp else b


def conv_series_probs(model, x, lags, mu=None):
    """Exact nested-convolution probabilities for aligned ``x`` and ``lags``."""
    x = np.asarray(x, dtype=np.int64)
    lags = np.asarray(lags, dtype=np.int64)
    max_x = int(x.max()) if x.size else 0
    max_lag = int(lags.max()) if lags.size else 0
    thin = np.stack([thinned_pmf_table(model.thinning, a, max_lag, max_x)
                     for a in model.alphas])
    z = np.arange(max_x + 1)
    innov = np.atleast_2d(innovation_pmf(model.innovation, z[None, :],
                                         _mu_rows(model, mu)))
    return np.clip(_kernels.conv_probs(x, lags, thin, innov), 0.0, 1.0)


def series_probs(model, series, method=DAVIES, rule=None, mu=None):
    """Transition probabilities of ``series[p:]`` given their lags.

    ``mu`` is an optional innovation-mean path aligned with ``series[p:]``.
    """
    x = np.asarray(series, dtype=np.int64)
    lags = lag_matrix(x, model.p)
    if method == EXACT:
        return conv_series_probs(model, x[model.p:], lags, mu)
    if method == DAVIES:
        return davies_series_probs(model, x[model.p:], lags, rule or default_rule(), mu)
    raise InvalidParameterError(f"unknown transition method {method!r}")


def _point(model, x, lags):
    if x < 0:
        raise InvalidParameterError("x must be non-negative")
    lags = np.asarray(lags, dtype=np.int64)
    if lags.shape != (model.p,):
        raise InvalidParameterError(f"expected {model.p} lags")
    return np.array([x]), lags[None, :]


def transition_prob_conv(model, x, lags):
    xs, lg = _point(model, x, lags)
    return float(conv_series_probs(model, xs, lg)[0])


def transition_prob_davies(model, x, lags, rule=None, clamp=True):
    xs, lg = _point(model, x, lags)
    return float(davies_series_probs(model, xs, lg, rule or default_rule(), clamp=clamp)[0])


def transition_cdf_davies(model, x, lags, rule=None):
    """``P(X_t < x | lags)`` for ``x >= 1`` by chf inversion."""
    if x < 1:
        raise InvalidParameterError("the cdf is evaluated at x >= 1")
    rule = rule or default_rule()
    u = rule.nodes
    phi = transition_chf(model, u, lags)
    integrand = (phi * np.exp(-1j * u * x) / (1.0 - np.exp(-1j * u))).real
    return float(0.5 - integrand @ rule.weights / np.pi)


def transition_cdf_davies_full(model, x, lags, count=600):
    """Same cdf integrated over the full ``(-pi, pi)`` range."""
    rule = gauss_legendre(count, -np.pi, np.pi)
    u = rule.nodes
    phi = transition_chf(model, u, lags)
    integrand = (phi * np.exp(-1j * u * x) / (1.0 - np.exp(-1j * u))).real
    return float(0.5 - integrand @ rule.weights / (2.0 * np.pi))


def log_transition(model, x, lags, method=DAVIES, rule=None):
    """Log transition probability, floored at ``log(1e-300)``."""
    if method == EXACT:
        prob = transition_prob_conv(model, x, lags)
    elif method == DAVIES:
        prob = transition_prob_davies(model, x, lags, rule)
    else:
        raise InvalidParameterError(f"unknown transition method {method!r}")
    return safe_log(prob)


def safe_log(prob):
    with np.errstate(divide="ignore"):
        out = np.maximum(np.log(prob), LOG_FLOOR)
    return out[()] if np.ndim(out) == 0 else out


def support_limit(model, lags, tail=1e-12):
    """A count beyond which the conditional tail mass is negligible."""
    lags = np.asarray(lags, dtype=float)
    mean = lags @ model.alpha_array + model.innovation.mu
    var = lags @ model.betas() + model.innovation.variance()
    return max(int(mean + 12.0 * np.sqrt(var)) + 10, pmf_support_limit(model.innovation, tail))
