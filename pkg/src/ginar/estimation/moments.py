"""Moment-type estimators: Yule-Walker and conditional least squares."""
import numpy as np
from scipy import linalg

from ..errors import NumericalError
from ..thinning import ThinningFamily
from ._common import FitResult, ModelTemplate, check_series, clamp_theta

R_FLOOR = 1e-8
SIGMA2_FLOOR = 1e-8


def sample_acvf(series, k):
    """Biased sample autocovariance ``(1/n) sum (x_t - xbar)(x_{t+|k|} - xbar)``."""
    x = np.asarray(series, dtype=float)
    n = len(x)
    k = abs(int(k))
    d = x - x.mean()
    if k >= n:
        return 0.0
    return float(d[:n - k] @ d[k:]) / n


def sample_acf(series, maxlag):
    g0 = sample_acvf(series, 0)
    gam = np.array([sample_acvf(series, k) for k in range(maxlag + 1)])
    return gam / g0 if g0 > 0 else np.where(np.arange(maxlag + 1) == 0, 1.0, 0.0)


def _betas(template, alphas):
    # polynomial forms of the variance coefficient, valid for unconstrained alphas
    a = np.asarray(alphas, dtype=float)
    family = template.thinning.family
    if family is ThinningFamily.BINOMIAL:
        return a * (1.0 - a)
    if family is ThinningFamily.NEGBINOMIAL:
        return a * (1.0 + a)
    return a * (1.0 + 2.0 * template.thinning.rho - a)


def _r_from_moments(mu, sigma2, flags):
    r = (sigma2 - mu) / mu**2
    if r < R_FLOOR:
        flags.append("r clamped at floor")
        r = R_FLOOR
    return r


def _finish(method, template, alphas, mu, sigma2, n_used, flags, objective=np.nan,
            constrain=True):
    theta = list(alphas) + [mu]
    if template.has_r:
        theta.append(_r_from_moments(mu, sigma2, flags))
    theta = np.array(theta)
    raw = theta.copy()
    if constrain:
        theta = clamp_theta(template, theta)
        if not np.allclose(theta, raw):
            flags.append("estimate clamped into the parameter space")
    return FitResult(method, template, theta, float(objective), True, 0, n_used,
                     flags=flags, extras={"unconstrained": raw, "sigma2_eps": float(sigma2)})


def fit_yw(series, template):
    """Yule-Walker estimates of ``(alpha, mu_eps[, r])``."""
    x = check_series(series, template.p + 2)
    p = template.p
    gam = np.array([sample_acvf(x, k) for k in range(p + 1)])
    Gamma = linalg.toeplitz(gam[:p])
    if np.linalg.cond(Gamma) > 1e12:
        raise NumericalError("sample autocovariance matrix is singular")
    alphas = np.linalg.solve(Gamma, gam[1:])
    xbar = x.mean()
    mu = (1.0 - alphas.sum()) * xbar
    v_p = gam[0] - alphas @ gam[1:]
    sigma2 = v_p - xbar * _betas(template, alphas).sum()
    flags = []
    if mu <= 0:
        flags.append("non-positive innovation mean")
    return _finish("yw", template, alphas, mu, sigma2, len(x) - p, flags)


def _design(x, p):
    n = len(x)
    cols = [x[p - j:n - j] for j in range(1, p + 1)]
    return np.column_stack(cols + [np.ones(n - p)]).astype(float), x[p:].astype(float)


def fit_cls(series, template):
    """Conditional least squares for ``(alpha, mu_eps)``, then two-step ``sigma^2``.

    The conditional mean is affine in the parameters, so this is ordinary
    least squares on ``(x_{t-1}, ..., x_{t-p}, 1)``. Estimates are not
    constrained; :meth:`FitResult.to_model` clamps when a valid model is needed.
    """
    x = check_series(series, template.p + 2)
    eta = cls_coefficients(x, template.p)
    A, y = _design(x, template.p)
    resid = y - A @ eta
    sigma2 = fit_cls_sigma2(x, template, eta)
    flags = []
    fit = _finish("cls", template, eta[:-1], eta[-1], sigma2, len(y), flags,
                  objective=float(resid @ resid), constrain=False)
    return fit


def cls_coefficients(series, p):
    """Least-squares ``(alpha_1..alpha_p, mu_eps)``; accepts real-valued input."""
    A, y = _design(np.asarray(series, dtype=float), p)
    if np.linalg.matrix_rank(A) < A.shape[1]:
        raise NumericalError("CLS design matrix is rank deficient")
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return coef


def fit_cls_sigma2(series, template, eta):
    """Two-step innovation variance given CLS ``eta = (alpha, mu_eps)``.

    Minimising ``sum [(x_t - m_t)^2 - (sum_j beta_j x_{t-j} + s)]^2`` over ``s``
    alone gives the mean of ``(x_t - m_t)^2 - sum_j beta_j x_{t-j}``.
    """
    x = check_series(series, template.p + 2)
    A, y = _design(x, template.p)
    eta = np.asarray(eta, dtype=float)
    sq = (y - A @ eta) ** 2
    betas = _betas(template, eta[:-1])
    s = float(np.mean(sq - A[:, :-1] @ betas))
    return max(s, SIGMA2_FLOOR)


def cls_objective(series, p, eta):
    x = np.asarray(series)
    A, y = _design(x, p)
    r = y - A @ np.asarray(eta, dtype=float)
    return float(r @ r)


def two_step_objective(series, template, eta, sigma2):
    x = np.asarray(series)
    A, y = _design(x, template.p)
    eta = np.asarray(eta, dtype=float)
    sq = (y - A @ eta) ** 2
    v = A[:, :-1] @ _betas(template, eta[:-1]) + sigma2
    return float(np.sum((sq - v) ** 2))
