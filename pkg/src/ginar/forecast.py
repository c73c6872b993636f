"""Conditional-mean forecasts and Monte Carlo forecast distributions.

Monte Carlo trajectories thin the observed history for the first steps and
their own simulated values afterwards, so every forecast is a count.

Prediction intervals come from the empirical pmf. The default rule picks the
contiguous integer interval whose empirical mass is the smallest value at or
above the level (ties go to the shorter, then the leftmost interval). The
equal-tailed rule ``[q_{(1-level)/2}, q_{(1+level)/2}]`` is also available; on
low counts it over-covers noticeably because each tail can lose nearly all
of its nominal mass.
"""
import json
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidParameterError
from .model import seasonal_mu

MIN_MASS = "min-mass"
EQUAL_TAILED = "equal-tailed"


@dataclass(frozen=True)
class ForecastDistribution:
    horizon: int
    samples_per_horizon: int
    support_start: tuple          # first count of each horizon's pmf
    pmf: tuple                    # per horizon, relative frequencies from support_start
    median: tuple
    intervals: dict               # level -> tuple of (lower, upper) per horizon
    interval_rule: str = MIN_MASS

    def pmf_dict(self, k):
        """``{count: frequency}`` at horizon ``k`` (1-based), zero entries dropped."""
        start = self.support_start[k - 1]
        return {start + i: float(f) for i, f in enumerate(self.pmf[k - 1]) if f > 0}

    def to_dict(self):
        return {
            "horizon": self.horizon,
            "samples_per_horizon": self.samples_per_horizon,
            "interval_rule": self.interval_rule,
            "median": [int(m) for m in self.median],
            "intervals": {f"{level:g}": [[int(lo), int(hi)] for lo, hi in pairs]
                          for level, pairs in sorted(self.intervals.items())},
            "pmf": [{str(c): f for c, f in self.pmf_dict(k).items()}
                    for k in range(1, self.horizon + 1)],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def forecast_mean(model, history, h):
    """Conditional-expectation recursion; ``history`` is oldest first."""
    p = model.p
    history = np.asarray(history, dtype=float)
    if len(history) < p or h < 1:
        raise InvalidParameterError(f"need at least {p} past values and h >= 1")
    vals = list(history[-p:])
    out = []
    for _ in range(h):
        nxt = float(np.dot(model.alpha_array, vals[::-1][:p]) + model.innovation.mu)
        vals.append(nxt)
        out.append(nxt)
    return np.array(out)


def _lower_median(counts, start):
    cdf = np.cumsum(counts)
    return start + int(np.searchsorted(cdf, 0.5 * cdf[-1], side="left"))


def _equal_tailed(counts, start, level):
    cdf = np.cumsum(counts)
    total = cdf[-1]
    tail = 0.5 * (1.0 - level)
    lo = int(np.searchsorted(cdf, tail * total - 1e-9 * total, side="left"))
    hi = int(np.searchsorted(cdf, (1.0 - tail) * total - 1e-9 * total, side="left"))
    return start + lo, start + hi


def _min_mass(counts, start, level, median):
    total = int(counts.sum())
    need = int(np.ceil(level * total - 1e-9))
    cum = np.concatenate([[0], np.cumsum(counts)])
    m = median - start
    best = None
    b = m
    for a in range(m + 1):
        b = max(b, a, m)
        while b < len(counts) and cum[b + 1] - cum[a] < need:
            b += 1
        if b == len(counts):
            break
        key = (cum[b + 1] - cum[a], b - a, a)
        if best is None or key < best:
            best = key
    _, width, a = best
    return start + a, start + a + width


def _summarise(paths, levels, rule):
    B, h = paths.shape
    starts, pmfs, medians = [], [], []
    intervals = {float(level): [] for level in levels}
    for k in range(h):
        col = paths[:, k]
        start = int(col.min())
        counts = np.bincount(col - start)
        med = _lower_median(counts, start)
        starts.append(start)
        pmfs.append(tuple(counts / B))
        medians.append(med)
        for level in intervals:
            if rule == MIN_MASS:
                intervals[level].append(_min_mass(counts, start, level, med))
            else:
                intervals[level].append(_equal_tailed(counts, start, level))
    return tuple(starts), tuple(pmfs), tuple(medians), {k: tuple(v) for k, v in intervals.items()}


def forecast_paths(model, history, h, B, seed, seasonal=None, start_time=None):
    """``B x h`` matrix of simulated future counts."""
    p = model.p
    history = np.asarray(history, dtype=np.int64)
    if len(history) < p or h < 1 or B < 1:
        raise InvalidParameterError(f"need at least {p} past values, h >= 1 and B >= 1")
    if seasonal is None:
        mu = np.full(h, model.innovation.mu)
    else:
        t0 = len(history) + 1 if start_time is None else start_time
        mu = seasonal_mu(seasonal, np.arange(t0, t0 + h))
    rng = np.random.default_rng(seed)
    U = rng.random((B, h, 2 * p + 1))
    return _kernels.forecast_paths(U, history[-p:][::-1], model.alpha_array,
                                   model.thinning.code, model.thinning.rho_value,
                                   model.innovation.code, mu, model.innovation.r_value)


def forecast_mc(model, history, h, B=5000, levels=(0.95,), seed=0, seasonal=None,
                start_time=None, interval_rule=MIN_MASS):
    """Monte Carlo forecast distribution over ``h`` steps.

    ``history`` is oldest first. With ``seasonal`` the innovation mean at step
    ``k`` is taken at time ``start_time + k - 1`` (default ``len(history) + 1``).
    """
    if interval_rule not in (MIN_MASS, EQUAL_TAILED):
        raise InvalidParameterError(f"unknown interval rule {interval_rule!r}")
    for level in levels:
        if not 0.0 < level <= 1.0:
            raise InvalidParameterError("levels must lie in (0, 1]")
    paths = forecast_paths(model, history, h, B, seed, seasonal, start_time)
    starts, pmfs, medians, intervals = _summarise(paths, levels, interval_rule)
    return ForecastDistribution(h, B, starts, pmfs, medians, intervals, interval_rule)


def one_step_coverage(model, series, level=0.95, B=5000, seed=0, interval_rule=MIN_MASS):
    """Fraction of ``t > p`` whose ``x_t`` lies in the one-step interval.

    The forecast at ``t`` uses the stream ``SeedSequence([seed, t])``.
    """
    if hasattr(model, "to_model"):
        model = model.to_model()
    x = np.asarray(series, dtype=np.int64)
    p = model.p
    if len(x) <= p:
        raise InvalidParameterError("series must be longer than the model order")
    hits = 0
    for t in range(p, len(x)):
        dist = forecast_mc(model, x[t - p:t], 1, B, (level,),
                           np.random.SeedSequence([seed, t]), interval_rule=interval_rule)
        lo, hi = dist.intervals[float(level)][0]
        hits += lo <= x[t] <= hi
    return hits / (len(x) - p)
