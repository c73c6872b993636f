"""Monte Carlo studies of estimator bias, SD and RMSE.

Seeding: the series for replicate ``i`` at sample size ``n`` is drawn from
``SeedSequence([seed, n, i])``. The estimator list does not enter, so adding
an estimator leaves the simulated data unchanged. Bootstrap standard errors
for cell ``(n, method)`` resample with ``SeedSequence([seed, n, crc32(method), 1])``.

SD is the population form (divide by the number of successful fits) so that
``RMSE^2 = bias^2 + SD^2`` holds exactly.
"""
import csv
import hashlib
import io
import json
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import GinarError, InvalidParameterError
from .estimation import FitOptions, fit
from .families import check_method, family_model, family_template

FAIL_FLAG_FRACTION = 0.05
COLUMNS = ("n", "method", "parameter", "bias", "sd", "rmse", "se_bias", "se_sd", "se_rmse",
           "failures", "replicates", "flagged")


@dataclass(frozen=True)
class StudyConfig:
    family: str
    alphas: tuple
    mu: float
    r: float | None = None
    sample_sizes: tuple = (500,)
    estimators: tuple = ("cml", "yw", "cls", "pseudo", "whittle", "saddle")
    replicates: int = 1000
    bootstrap: int = 1000
    seed: int = 0
    burnin: int = 500
    transition: str = "davies"
    quad_nodes: int = 300

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.replicates < 2:
            raise InvalidParameterError("a study needs at least two replicates")
        if self.bootstrap < 1:
            raise InvalidParameterError("bootstrap count must be positive")
        if not self.sample_sizes or min(self.sample_sizes) < len(self.alphas) + 4:
            raise InvalidParameterError("sample sizes are too small for the model order")
        for method in self.estimators:
            check_method(self.family, method)
        self.model()

    def model(self):
        return family_model(self.family, self.alphas, self.mu, self.r)

    def template(self):
        return family_template(self.family, len(self.alphas))

    def options(self):
        return FitOptions(transition_method=self.transition, quad_nodes=self.quad_nodes)

    def cell_key(self, n, method):
        """Digest of everything that determines the estimates of one cell."""
        payload = {k: v for k, v in asdict(self).items()
                   if k not in ("sample_sizes", "estimators", "bootstrap")}
        payload.update(n=n, method=method)
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:20]

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        model = data.pop("model", {})
        data.update(model)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            data = yaml.safe_load(fh)
        if not isinstance(data, dict):
            raise InvalidParameterError("study config must be a mapping")
        return cls.from_dict(data)


@dataclass
class StudyResult:
    rows: list
    estimates: dict = field(default_factory=dict, compare=False)

    def row(self, n, method, parameter):
        for r in self.rows:
            if (r["n"], r["method"], r["parameter"]) == (n, method, parameter):
                return r
        raise KeyError((n, method, parameter))


def replicate_series(config, n, index):
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, n, index]))
    return config.model().simulate(n, rng, burnin=config.burnin)


def _fit_one(series, template, method, options):
    try:
        theta = np.asarray(fit(series, template, method, options).theta, dtype=float)
    except (GinarError, ArithmeticError, np.linalg.LinAlgError):
        return None
    return theta if np.all(np.isfinite(theta)) else None


def _replicate(config, n, index, methods):
    series = replicate_series(config, n, index)
    template, options = config.template(), config.options()
    return {m: _fit_one(series, template, m, options) for m in methods}


def aggregate(estimates, truth):
    """Bias, population SD and RMSE per column of ``estimates``."""
    est = np.asarray(estimates, dtype=float)
    mean = est.mean(axis=0)
    bias = mean - truth
    sd = np.sqrt(np.mean((est - mean) ** 2, axis=0))
    return bias, sd, np.sqrt(bias**2 + sd**2)


def bootstrap_errors(estimates, truth, B, seed_words):
    rng = np.random.default_rng(np.random.SeedSequence(seed_words))
    est = np.asarray(estimates, dtype=float)
    R = len(est)
    stats_ = np.empty((B, 3, est.shape[1]))
    for b in range(B):
        stats_[b] = aggregate(est[rng.integers(0, R, R)], truth)
    return stats_.std(axis=0, ddof=1) if B > 1 else np.zeros((3, est.shape[1]))


def _load_cache(cache_dir, key):
    if cache_dir is None:
        return None
    path = Path(cache_dir) / f"{key}.json"
    if not path.exists():
        return None
    data = json.loads(path.read_text())
    return [None if e is None else np.array(e) for e in data]


def _save_cache(cache_dir, key, estimates):
    if cache_dir is None:
        return
    path = Path(cache_dir)
    path.mkdir(parents=True, exist_ok=True)
    data = [None if e is None else [float(v) for v in e] for e in estimates]
    tmp = path / f"{key}.json.tmp"
    tmp.write_text(json.dumps(data))
    tmp.replace(path / f"{key}.json")


def run_study(config, threads=1, cache_dir=None, progress=None):
    """Run every (sample size, estimator) cell of ``config``.

    Cells already present in ``cache_dir`` are read back instead of refitted.
    """
    template = config.template()
    truth = template.theta(config.model())
    names = template.param_names
    rows, all_estimates = [], {}
    for n in config.sample_sizes:
        cached = {m: _load_cache(cache_dir, config.cell_key(n, m)) for m in config.estimators}
        todo = [m for m in config.estimators if cached[m] is None]
        if todo:
            work = lambda i: _replicate(config, n, i, todo)
            if threads > 1:
                with ThreadPoolExecutor(threads) as pool:
                    reps = list(pool.map(work, range(config.replicates)))
            else:
                reps = [work(i) for i in range(config.replicates)]
            for m in todo:
                cached[m] = [rep[m] for rep in reps]
                _save_cache(cache_dir, config.cell_key(n, m), cached[m])
        for m in config.estimators:
            ok = [e for e in cached[m] if e is not None]
            failures = config.replicates - len(ok)
            all_estimates[(n, m)] = np.array(ok)
            if len(ok) < 2:
                bias = sd = rmse = np.full(len(names), np.nan)
                se = np.full((3, len(names)), np.nan)
            else:
                bias, sd, rmse = aggregate(ok, truth)
                se = bootstrap_errors(ok, truth, config.bootstrap,
                                      [config.seed, n, zlib.crc32(m.encode()), 1])
            for j, name in enumerate(names):
                rows.append({"n": n, "method": m, "parameter": name,
                             "bias": float(bias[j]), "sd": float(sd[j]), "rmse": float(rmse[j]),
                             "se_bias": float(se[0, j]), "se_sd": float(se[1, j]),
                             "se_rmse": float(se[2, j]), "failures": failures,
                             "replicates": config.replicates,
                             "flagged": failures > FAIL_FLAG_FRACTION * config.replicates})
            if progress is not None:
                progress(n, m)
    return StudyResult(rows, all_estimates)


def emit_table(result, fmt="csv"):
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in result.rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
        return buf.getvalue()
    if fmt == "markdown":
        return _markdown(result)
    raise InvalidParameterError(f"unknown table format {fmt!r}")


def parse_table(text):
    """Inverse of ``emit_table(result, "csv")``."""
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append({"n": int(rec["n"]), "method": rec["method"], "parameter": rec["parameter"],
                     **{k: float(rec[k]) for k in COLUMNS[3:9]},
                     "failures": int(rec["failures"]), "replicates": int(rec["replicates"]),
                     "flagged": rec["flagged"] == "True"})
    return StudyResult(rows)


def _markdown(result):
    lines = []
    cells = []
    for row in result.rows:
        if (row["n"], row["method"]) not in cells:
            cells.append((row["n"], row["method"]))
    for n, method in cells:
        block = [r for r in result.rows if (r["n"], r["method"]) == (n, method)]
        failures = block[0]["failures"]
        title = f"### n = {n}, {method}"
        if failures:
            title += f" ({failures} failed fits{', flagged' if block[0]['flagged'] else ''})"
        lines += [title, "", "| | " + " | ".join(r["parameter"] for r in block) + " |",
                  "|---" * (len(block) + 1) + "|"]
        for stat, label in (("bias", "Bias"), ("sd", "SD"), ("rmse", "RMSE")):
            lines.append(f"| {label} | " + " | ".join(f"{r[stat]:.3f}" for r in block) + " |")
        lines.append("")
    return "\n".join(lines)
