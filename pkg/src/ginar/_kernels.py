"""Hot numerical kernels, each with a numba loop and a numpy fallback.

Family codes shared with the public modules:

* thinning: 0 binomial, 1 negative binomial (geometric counting), 2 rho-binomial
* innovation: 0 Poisson, 1 negative binomial, 2 geometric

Random variates are produced by inverse-cdf search on caller-supplied
uniforms so that both backends consume the same stream. Each thinning draw
owns two uniforms (the rho-binomial mixture needs both) and each innovation
draw one, giving ``2p + 1`` uniforms per time step.
"""
import math

import numpy as np

from ._backend import get_backend, njit

THIN_BINOMIAL, THIN_NEGBIN, THIN_RHO = 0, 1, 2
INNOV_POISSON, INNOV_NEGBIN, INNOV_GEOMETRIC = 0, 1, 2

_NO_LIMIT = np.iinfo(np.int64).max
_TAIL_LOGP = -40.0


# ---------------------------------------------------------------------------
# inverse-cdf sampling
# ---------------------------------------------------------------------------

@njit
def _invert(u, logp0, c, s, d, zmax, mean):
    # pmf(z+1)/pmf(z) = c * (s + d*z) / (z + 1)
    z = 0
    lp = logp0
    cdf = math.exp(lp)
    while cdf < u and z < zmax:
        lp += math.log(c * (s + d * z) / (z + 1.0))
        z += 1
        cdf += math.exp(lp)
        if z > mean + 10.0 and lp < _TAIL_LOGP:
            break
    return z


@njit
def _draw_thinned(u1, u2, code, alpha, rho, n):
    if n == 0 or alpha <= 0.0:
        return 0
    if code == 0:
        if alpha >= 1.0:
            return n
        return _invert(u1, n * math.log1p(-alpha), alpha / (1.0 - alpha),
                       float(n), -1.0, n, n * alpha)
    if code == 1:
        return _invert(u1, -n * math.log1p(alpha), alpha / (1.0 + alpha),
                       float(n), 1.0, _NO_LIMIT, n * alpha)
    success = alpha / (1.0 + rho)
    if success >= 1.0:
        k = n
    else:
        k = _invert(u1, n * math.log1p(-success), success / (1.0 - success),
                    float(n), -1.0, n, n * success)
    if k == 0:
        return 0
    if rho <= 0.0:
        return k
    q = rho / (1.0 + rho)
    return k + _invert(u2, -k * math.log1p(rho), q, float(k), 1.0,
                       _NO_LIMIT, k * rho)


@njit
def _draw_innovation(u, code, mu, r):
    if code == 0:
        return _invert(u, -mu, mu, 1.0, 0.0, _NO_LIMIT, mu)
    if code == 1:
        size = 1.0 / r
        q = mu / (size + mu)
        return _invert(u, size * math.log1p(-q), q, size, 1.0, _NO_LIMIT, mu)
    return _invert(u, -math.log1p(mu), mu / (1.0 + mu), 1.0, 1.0, _NO_LIMIT, mu)


@njit
def _simulate_nb(U, alphas, thin_code, rho, innov_code, mu, r, init):
    T = U.shape[0]
    p = alphas.shape[0]
    hist = init.copy()  # newest first
    out = np.empty(T, dtype=np.int64)
    for t in range(T):
        total = 0
        for j in range(p):
            total += _draw_thinned(U[t, 2 * j], U[t, 2 * j + 1], thin_code,
                                   alphas[j], rho, hist[j])
        total += _draw_innovation(U[t, 2 * p], innov_code, mu[t], r)
        for j in range(p - 1, 0, -1):
            hist[j] = hist[j - 1]
        hist[0] = total
        out[t] = total
    return out


@njit
def _forecast_nb(U, history, alphas, thin_code, rho, innov_code, mu, r):
    B, h = U.shape[0], U.shape[1]
    out = np.empty((B, h), dtype=np.int64)
    for b in range(B):
        out[b] = _simulate_nb(U[b], alphas, thin_code, rho, innov_code, mu, r,
                              history)
    return out


def _invert_vec(u, logp0, c, s, d, zmax, mean):
    u, logp0, c, s, d, zmax, mean = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (u, logp0, c, s, d, zmax, mean)))
    z = np.zeros(u.shape, dtype=np.int64)
    lp = logp0.copy()
    cdf = np.exp(lp)
    active = (cdf < u) & (z < zmax)
    while active.any():
        idx = np.nonzero(active)[0]
        zi = z[idx]
        lp[idx] += np.log(c[idx] * (s[idx] + d[idx] * zi) / (zi + 1.0))
        z[idx] = zi + 1
        cdf[idx] += np.exp(lp[idx])
        tail = (z[idx] > mean[idx] + 10.0) & (lp[idx] < _TAIL_LOGP)
        active[idx] = (cdf[idx] < u[idx]) & (z[idx] < zmax[idx]) & ~tail
    return z


def _draw_thinned_vec(u1, u2, code, alpha, rho, n):
    n = np.asarray(n, dtype=np.int64)
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), n.shape)
    out = np.zeros(n.shape, dtype=np.int64)
    live = (n > 0) & (alpha > 0.0)
    if code == 0:
        full = live & (alpha >= 1.0)
        out[full] = n[full]
        m = live & ~full
        if m.any():
            a, k = alpha[m], n[m]
            out[m] = _invert_vec(u1[m], k * np.log1p(-a), a / (1.0 - a), k, -1.0,
                                 k, k * a)
        return out
    if code == 1:
        if live.any():
            a, k = alpha[live], n[live]
            out[live] = _invert_vec(u1[live], -k * np.log1p(a), a / (1.0 + a), k,
                                    1.0, _NO_LIMIT, k * a)
        return out
    success = alpha / (1.0 + rho)
    ks = np.zeros(n.shape, dtype=np.int64)
    full = live & (success >= 1.0)
    ks[full] = n[full]
    m = live & ~full
    if m.any():
        a, k = success[m], n[m]
        ks[m] = _invert_vec(u1[m], k * np.log1p(-a), a / (1.0 - a), k, -1.0, k,
                            k * a)
    out[:] = ks
    if rho > 0.0:
        m = ks > 0
        if m.any():
            k = ks[m]
            out[m] += _invert_vec(u2[m], -k * np.log1p(rho), rho / (1.0 + rho), k,
                                  1.0, _NO_LIMIT, k * rho)
    return out


def _draw_innovation_vec(u, code, mu, r):
    mu = np.broadcast_to(np.asarray(mu, dtype=float), u.shape)
    if code == 0:
        return _invert_vec(u, -mu, mu, 1.0, 0.0, _NO_LIMIT, mu)
    if code == 1:
        size = 1.0 / r
        q = mu / (size + mu)
        return _invert_vec(u, size * np.log1p(-q), q, size, 1.0, _NO_LIMIT, mu)
    return _invert_vec(u, -np.log1p(mu), mu / (1.0 + mu), 1.0, 1.0, _NO_LIMIT, mu)


def _forecast_np(U, history, alphas, thin_code, rho, innov_code, mu, r):
    B, h = U.shape[0], U.shape[1]
    p = alphas.shape[0]
    hist = np.tile(np.asarray(history, dtype=np.int64), (B, 1))
    out = np.empty((B, h), dtype=np.int64)
    for t in range(h):
        total = np.zeros(B, dtype=np.int64)
        for j in range(p):
            total += _draw_thinned_vec(U[:, t, 2 * j], U[:, t, 2 * j + 1],
                                       thin_code, alphas[j], rho, hist[:, j])
        total += _draw_innovation_vec(U[:, t, 2 * p], innov_code, mu[t], r)
        hist[:, 1:] = hist[:, :-1]
        hist[:, 0] = total
        out[:, t] = total
    return out


def _simulate_np(U, alphas, thin_code, rho, innov_code, mu, r, init):
    # A single path is sequential; run it as a batch of one trajectory.
    return _forecast_np(U[None], init, alphas, thin_code, rho, innov_code, mu, r)[0]


def simulate_path(U, alphas, thin_code, rho, innov_code, mu, r, init):
    """Run the recursion over ``U.shape[0]`` steps from ``init`` (newest first)."""
    args = (np.ascontiguousarray(U, dtype=float), np.asarray(alphas, dtype=float),
            int(thin_code), float(rho), int(innov_code),
            np.asarray(mu, dtype=float), float(r), np.asarray(init, dtype=np.int64))
    if get_backend() == "numba":
        return _simulate_nb(*args)
    return _simulate_np(*args)


def forecast_paths(U, history, alphas, thin_code, rho, innov_code, mu, r):
    """Simulate ``U.shape[0]`` trajectories of length ``U.shape[1]``."""
    args = (np.ascontiguousarray(U, dtype=float), np.asarray(history, dtype=np.int64),
            np.asarray(alphas, dtype=float), int(thin_code), float(rho),
            int(innov_code), np.asarray(mu, dtype=float), float(r))
    if get_backend() == "numba":
        return _forecast_nb(*args)
    return _forecast_np(*args)


# ---------------------------------------------------------------------------
# characteristic-function inversion
# ---------------------------------------------------------------------------

@njit
def _davies_nb(x, lags, log_phi_y, log_phi_eps, nodes, weights, cdf_factor):
    n, p = lags.shape
    K = nodes.shape[0]
    m = log_phi_eps.shape[0]
    out = np.empty(n)
    for t in range(n):
        row = t if m > 1 else 0
        xt = x[t]
        shift = xt if xt > 0 else 1
        acc = 0.0
        for k in range(K):
            L = log_phi_eps[row, k]
            for j in range(p):
                L += lags[t, j] * log_phi_y[j, k]
            L -= 1j * nodes[k] * shift
            val = np.exp(L)
            if xt > 0:
                acc += weights[k] * val.real
            else:
                acc += weights[k] * (val * cdf_factor[k]).real
        if xt > 0:
            out[t] = acc / np.pi
        else:
            out[t] = 0.5 - acc / np.pi
    return out


def _davies_np(x, lags, log_phi_y, log_phi_eps, nodes, weights, cdf_factor):
    shift = np.where(x > 0, x, 1)
    L = log_phi_eps + lags @ log_phi_y - 1j * np.outer(shift, nodes)
    val = np.exp(L)
    plain = (val.real @ weights) / np.pi
    at_zero = 0.5 - ((val * cdf_factor).real @ weights) / np.pi
    return np.where(x > 0, plain, at_zero)


def davies_probs(x, lags, log_phi_y, log_phi_eps, nodes, weights):
    """Unclamped transition probabilities ``b(x_t)`` by chf inversion.

    ``log_phi_y`` is ``(p, K)``; ``log_phi_eps`` is ``(1, K)`` or ``(n, K)`` for
    a time-varying innovation law. States ``x_t = 0`` go through the cdf
    integral ``a(1)``; the half-range integrals rely on the integrands being
    even in ``u``.
    """
    x = np.asarray(x, dtype=np.int64)
    lags = np.ascontiguousarray(lags, dtype=np.int64)
    nodes = np.asarray(nodes, dtype=float)
    cdf_factor = 1.0 / (1.0 - np.exp(-1j * nodes))
    args = (x, lags, np.ascontiguousarray(log_phi_y, dtype=complex),
            np.ascontiguousarray(log_phi_eps, dtype=complex), nodes,
            np.asarray(weights, dtype=float), cdf_factor)
    if get_backend() == "numba":
        return _davies_nb(*args)
    return _davies_np(*args)


# ---------------------------------------------------------------------------
# exact nested convolution
# ---------------------------------------------------------------------------

@njit
def _conv_nb(x, lags, thin_table, innov_table):
    n, p = lags.shape
    m = innov_table.shape[0]
    out = np.empty(n)
    work = np.empty(x.max() + 1 if n > 0 else 1)
    nxt = np.empty_like(work)
    for t in range(n):
        xt = x[t]
        for z in range(xt + 1):
            work[z] = thin_table[0, lags[t, 0], z]
        for j in range(1, p):
            row = thin_table[j, lags[t, j]]
            for z in range(xt + 1):
                s = 0.0
                for i in range(z + 1):
                    s += work[i] * row[z - i]
                nxt[z] = s
            for z in range(xt + 1):
                work[z] = nxt[z]
        eps = innov_table[t if m > 1 else 0]
        total = 0.0
        for z in range(xt + 1):
            total += work[z] * eps[xt - z]
        out[t] = total
    return out


def _conv_np(x, lags, thin_table, innov_table):
    n, p = lags.shape
    m = innov_table.shape[0]
    out = np.empty(n)
    for t in range(n):
        xt = x[t]
        work = thin_table[0, lags[t, 0], :xt + 1]
        for j in range(1, p):
            work = np.convolve(work, thin_table[j, lags[t, j], :xt + 1])[:xt + 1]
        eps = innov_table[t if m > 1 else 0, :xt + 1]
        out[t] = work @ eps[::-1]
    return out


def conv_probs(x, lags, thin_table, innov_table):
    """Transition probabilities by nested convolution over cached pmf rows.

    ``thin_table[j, l, z] = P(alpha_j o l = z)`` and ``innov_table[t, z]`` (or a
    single row) hold the innovation pmf, both for ``z <= max(x)``.
    """
    args = (np.asarray(x, dtype=np.int64), np.ascontiguousarray(lags, dtype=np.int64),
            np.ascontiguousarray(thin_table, dtype=float),
            np.ascontiguousarray(innov_table, dtype=float))
    if get_backend() == "numba":
        return _conv_nb(*args)
    return _conv_np(*args)


# ---------------------------------------------------------------------------
# saddlepoint density (binomial thinning)
# ---------------------------------------------------------------------------

@njit
def _cgf_nb(u, lags_t, alphas, innov_code, mu, r):
    K = 0.0
    K1 = 0.0
    K2 = 0.0
    eu = math.exp(u)
    for j in range(alphas.shape[0]):
        a = alphas[j]
        base = 1.0 - a + a * eu
        frac = a * eu / base
        K += lags_t[j] * math.log(base)
        K1 += lags_t[j] * frac
        K2 += lags_t[j] * frac * (1.0 - frac)
    if innov_code == 0:
        K += mu * (eu - 1.0)
        K1 += mu * eu
        K2 += mu * eu
    else:
        size = 1.0 / r if innov_code == 1 else 1.0
        q = mu / (size + mu)
        den = 1.0 - q * eu
        K += size * (math.log1p(-q) - math.log(den))
        K1 += size * q * eu / den
        K2 += size * q * eu / (den * den)
    return K, K1, K2


@njit
def _saddle_nb(x, lags, alphas, innov_code, mu, r, tol, max_iter):
    n, p = lags.shape
    m = mu.shape[0]
    logd = np.zeros(n)
    ok = np.ones(n, dtype=np.bool_)
    for t in range(n):
        mt = mu[t if m > 1 else 0]
        xt = x[t]
        if xt == 0:
            v = 0.0
            for j in range(p):
                v += lags[t, j] * math.log1p(-alphas[j])
            if innov_code == 0:
                v -= mt
            else:
                size = 1.0 / r if innov_code == 1 else 1.0
                v += size * math.log1p(-mt / (size + mt))
            logd[t] = v
            continue
        # bracket the root of K'(u) = x
        if innov_code == 0:
            hi_lim = np.inf
        else:
            size = 1.0 / r if innov_code == 1 else 1.0
            hi_lim = -math.log(mt / (size + mt))
        lo = -1.0
        while _cgf_nb(lo, lags[t], alphas, innov_code, mt, r)[1] > xt and lo > -700.0:
            lo *= 2.0
        if hi_lim == np.inf:
            hi = 1.0
            while _cgf_nb(hi, lags[t], alphas, innov_code, mt, r)[1] < xt and hi < 700.0:
                hi *= 2.0
        else:
            hi = hi_lim
        u = 0.0
        converged = False
        for _ in range(max_iter):
            K, K1, K2 = _cgf_nb(u, lags[t], alphas, innov_code, mt, r)
            g = K1 - xt
            if abs(g) <= tol:
                converged = True
                break
            if g > 0.0:
                hi = u
            else:
                lo = u
            step = u - g / K2
            if not (lo < step < hi) or not np.isfinite(step):
                step = 0.5 * (lo + hi)
            u = step
        if not converged:
            ok[t] = False
            continue
        K, K1, K2 = _cgf_nb(u, lags[t], alphas, innov_code, mt, r)
        logd[t] = -0.5 * math.log(2.0 * np.pi * K2) + K - u * xt
    return logd, ok


def _cgf_vec(u, lags, alphas, innov_code, mu, r):
    eu = np.exp(u)
    base = 1.0 - alphas + alphas * eu[:, None]
    frac = alphas * eu[:, None] / base
    K = (lags * np.log(base)).sum(axis=1)
    K1 = (lags * frac).sum(axis=1)
    K2 = (lags * frac * (1.0 - frac)).sum(axis=1)
    if innov_code == 0:
        K = K + mu * (eu - 1.0)
        K1 = K1 + mu * eu
        K2 = K2 + mu * eu
    else:
        size = 1.0 / r if innov_code == 1 else 1.0
        q = mu / (size + mu)
        den = 1.0 - q * eu
        K = K + size * (np.log1p(-q) - np.log(den))
        K1 = K1 + size * q * eu / den
        K2 = K2 + size * q * eu / den**2
    return K, K1, K2


def _saddle_np(x, lags, alphas, innov_code, mu, r, tol, max_iter):
    n = x.shape[0]
    mu = np.broadcast_to(mu, (n,)) if mu.shape[0] == 1 else mu
    logd = np.zeros(n)
    ok = np.ones(n, dtype=bool)
    zero = x == 0
    if zero.any():
        v = lags[zero] @ np.log1p(-alphas)
        if innov_code == 0:
            v = v - mu[zero]
        else:
            size = 1.0 / r if innov_code == 1 else 1.0
            v = v + size * np.log1p(-mu[zero] / (size + mu[zero]))
        logd[zero] = v
    idx = np.nonzero(~zero)[0]
    if idx.size == 0:
        return logd, ok
    xt, lg, mt = x[idx].astype(float), lags[idx].astype(float), mu[idx]
    if innov_code == 0:
        hi_lim = np.full(idx.size, np.inf)
    else:
        size = 1.0 / r if innov_code == 1 else 1.0
        hi_lim = -np.log(mt / (size + mt))
    lo = np.full(idx.size, -1.0)
    for _ in range(12):
        bad = (_cgf_vec(lo, lg, alphas, innov_code, mt, r)[1] > xt) & (lo > -700.0)
        if not bad.any():
            break
        lo[bad] *= 2.0
    finite = np.isfinite(hi_lim)
    hi = np.where(finite, hi_lim, 1.0)
    for _ in range(12):
        # finite upper limits are poles of the cgf; they are masked out here
        with np.errstate(divide="ignore", invalid="ignore"):
            k1_hi = _cgf_vec(hi, lg, alphas, innov_code, mt, r)[1]
        bad = ~finite & (k1_hi < xt) & (hi < 700.0)
        if not bad.any():
            break
        hi[bad] *= 2.0
    u = np.zeros(idx.size)
    done = np.zeros(idx.size, dtype=bool)
    for _ in range(max_iter):
        K, K1, K2 = _cgf_vec(u, lg, alphas, innov_code, mt, r)
        g = K1 - xt
        done |= np.abs(g) <= tol
        if done.all():
            break
        act = ~done
        hi = np.where(act & (g > 0.0), u, hi)
        lo = np.where(act & (g < 0.0), u, lo)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = u - g / K2
        bad = ~((lo < step) & (step < hi) & np.isfinite(step))
        step = np.where(bad, 0.5 * (lo + hi), step)
        u = np.where(act, step, u)
    K, K1, K2 = _cgf_vec(u, lg, alphas, innov_code, mt, r)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = -0.5 * np.log(2.0 * np.pi * K2) + K - u * xt
    logd[idx] = np.where(done, vals, 0.0)
    ok[idx] = done
    return logd, ok


def saddle_logdens(x, lags, alphas, innov_code, mu, r, tol=1e-10, max_iter=200):
    """Per-point saddlepoint log-densities and a convergence mask.

    Zero counts use the exact probability of all components being zero, since
    ``K'(u) = 0`` has no finite root.
    """
    args = (np.asarray(x, dtype=np.int64), np.ascontiguousarray(lags, dtype=np.int64),
            np.asarray(alphas, dtype=float), int(innov_code),
            np.atleast_1d(np.asarray(mu, dtype=float)), float(r), float(tol),
            int(max_iter))
    if get_backend() == "numba":
        return _saddle_nb(*args)
    return _saddle_np(*args)
