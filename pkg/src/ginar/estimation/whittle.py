"""Frequency-domain (Whittle) estimation.

The spectral density is ``c / (2 pi |alpha(e^{-i nu})|^2)`` with
``c = sigma_eps^2 + mu_X sum_j beta_j``. The criterion identifies ``alpha`` and
``c``; ``c`` is profiled out in closed form. The innovation mean is then
recovered as ``xbar (1 - sum alpha)`` and the innovation variance as
``c - xbar sum_j beta_j``.
"""
import numpy as np

from ..errors import InvalidSeriesError
from ..model import transfer_sq
from ..thinning import variance_coeff
from ._common import (FitOptions, FitResult, alphas_from_z, check_series, clamp_theta,
                      interior_start, minimize, z_from_alphas)
from .moments import R_FLOOR, fit_yw


def fourier_frequencies(N):
    j = np.arange(1, N // 2 + 1)
    return 2.0 * np.pi * j / N


def periodogram(series):
    """``I(nu_j) = |sum_t (x_t - xbar) e^{-i nu_j t}|^2 / (2 pi N)`` for ``j = 1..N//2``."""
    x = np.asarray(series, dtype=float)
    N = len(x)
    if N < 4:
        raise InvalidSeriesError("periodogram needs at least 4 observations")
    d = np.fft.fft(x - x.mean())
    return np.abs(d[1:N // 2 + 1]) ** 2 / (2.0 * np.pi * N)


def whittle_criterion(series, alphas, c, I=None):
    """``(1/N) sum_j [log f(nu_j) + I(nu_j) / f(nu_j)]``."""
    N = len(series)
    I = periodogram(series) if I is None else I
    f = c / (2.0 * np.pi * transfer_sq(alphas, fourier_frequencies(N)))
    return float(np.sum(np.log(f) + I / f) / N)


def profile_scale(series, alphas, I=None):
    """The ``c`` minimising the criterion for fixed ``alphas``."""
    N = len(series)
    I = periodogram(series) if I is None else I
    return float(np.mean(2.0 * np.pi * transfer_sq(alphas, fourier_frequencies(N)) * I))


def fit_whittle(series, template, options=None):
    options = options or FitOptions()
    x = check_series(series, max(8, template.p + 3))
    I = periodogram(x)
    p = template.p

    def objective(z):
        a = alphas_from_z(z)
        return whittle_criterion(x, a, profile_scale(x, a, I), I)

    if options.initial is not None:
        a0 = np.asarray(options.initial, dtype=float)[:p]
    else:
        a0 = interior_start(template, fit_yw(x, template).extras["unconstrained"], x.mean())[:p]
    z, fun, converged, iterations = minimize(objective, z_from_alphas(a0), options)
    alphas = alphas_from_z(z)
    c = profile_scale(x, alphas, I)
    xbar = x.mean()
    mu = xbar * (1.0 - alphas.sum())
    betas = np.array([variance_coeff(template.thinning, a) for a in alphas])
    sigma2 = c - xbar * betas.sum()
    theta = list(alphas) + [mu]
    flags = [] if converged else ["optimiser did not converge"]
    if template.has_r:
        r = (sigma2 - mu) / mu**2
        if r < R_FLOOR:
            flags.append("r clamped at floor")
        theta.append(max(r, R_FLOOR))
    theta = clamp_theta(template, theta)
    return FitResult("whittle", template, theta, fun, converged, iterations, len(x),
                     flags=flags, extras={"spectral_scale": c, "sigma2_eps": float(sigma2)})
