"""``ginar`` command line: simulate, fit, forecast, study, acf, spectrum.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""
import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (DomainError, GinarError, InvalidParameterError, InvalidSeriesError,
                     NumericalError, UnsupportedMethodError)
from .estimation import METHODS, FitOptions, fit, fit_cml_seasonal, periodogram, sample_acf
from .estimation.cml import SeasonalTemplate
from .families import FAMILIES, check_method, family_model, family_template
from .forecast import EQUAL_TAILED, MIN_MASS, forecast_mc
from .inference import (OBSERVED_INFORMATION, bootstrap_covariance, cml_covariance,
                        information_criteria, ljung_box, pearson_residuals)
from .model import SeasonalMeanModel, conditional_mean, spectral_density
from .simstudy import StudyConfig, emit_table, run_study
from .transition import DAVIES, EXACT, lag_matrix
from .estimation.whittle import fourier_frequencies

EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 2, 3, 4


class DataError(Exception):
    pass


def read_series(path):
    """Counts from a CSV: one per line, optional header, optional leading time column."""
    with open(path, newline="") as fh:
        records = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if not records:
        raise DataError(f"{path}: no data")

    def numeric(cell):
        try:
            float(cell)
            return True
        except ValueError:
            return False

    start = 0 if all(numeric(c) for c in records[0]) else 1
    counts = []
    for lineno, row in enumerate(records[start:], start=start + 1):
        cell = row[-1].strip()
        if cell == "":
            raise DataError(f"{path}: row {lineno}: missing value")
        try:
            value = float(cell)
        except ValueError:
            raise DataError(f"{path}: row {lineno}: {cell!r} is not a number") from None
        if not np.isfinite(value) or value < 0 or value != int(value):
            raise DataError(f"{path}: row {lineno}: {cell!r} is not a non-negative integer")
        counts.append(int(value))
    if not counts:
        raise DataError(f"{path}: no data")
    return np.array(counts, dtype=np.int64)


def write_series(path, series):
    lines = ["t,count"] + [f"{t},{int(v)}" for t, v in enumerate(series, start=1)]
    _write(path, "\n".join(lines) + "\n")


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _model_from_args(args):
    alphas = [float(a) for a in args.alpha.split(",")]
    return family_model(args.family, alphas, args.mu, args.r)


def _floats(values):
    return [float(v) for v in values]


def fit_to_dict(result, family):
    out = {"method": result.method, "family": family, "p": result.template.p,
           "params": result.params, "objective": result.objective,
           "converged": result.converged, "iterations": result.iterations,
           "n_used": result.n_used, "flags": list(result.flags)}
    if "seasonal" in result.extras:
        out["seasonal_period"] = result.extras["seasonal"].period
    return out


def model_from_fit_json(data):
    """Rebuild the fitted model (and seasonal mean, if any) from ``cmd_fit`` JSON."""
    params = data["params"]
    p = int(data["p"])
    alphas = [params[f"alpha{j}"] for j in range(1, p + 1)]
    seasonal = None
    if "b0" in params:
        seasonal = SeasonalMeanModel(params["b0"], params["b1"], params["b2"],
                                     data.get("seasonal_period", 52.0))
        mu = float(np.exp(params["b0"]))
    else:
        mu = params["mu_eps"]
    return family_model(data["family"], alphas, mu, params.get("r")), seasonal


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_simulate(args):
    model = _model_from_args(args)
    series = model.simulate(args.n, np.random.default_rng(args.seed), burnin=args.burnin)
    write_series(args.out, series)


def cmd_fit(args):
    series = read_series(args.input)
    options = FitOptions(transition_method=args.transition, quad_nodes=args.quad_nodes)
    if args.seasonal_period:
        template = family_template(args.family, args.p)
        seasonal = SeasonalTemplate(args.p, template.innovation, template.thinning,
                                    args.seasonal_period)
        result = fit_cml_seasonal(series, seasonal, options)
    else:
        check_method(args.family, args.method)
        result = fit(series, family_template(args.family, args.p), args.method, options)
    out = fit_to_dict(result, args.family)
    if args.covariance != "none":
        try:
            if args.covariance == "bootstrap":
                cov = bootstrap_covariance(series, result, args.bootstrap, args.seed, args.threads)
            else:
                cov = cml_covariance(series, result, args.covariance)
            out["covariance"] = {"source": cov.source, "matrix": cov.matrix.tolist(),
                                 "standard_errors": dict(zip(result.param_names,
                                                             cov.standard_errors.tolist()))}
        except (NumericalError, UnsupportedMethodError, DomainError) as exc:
            out["covariance"] = {"error": str(exc)}
    try:
        out["criteria"] = information_criteria(result)
    except UnsupportedMethodError:
        out["criteria"] = None
    residuals = pearson_residuals(result.to_model(), series)
    lags = min(args.ljung_box_lags, len(residuals) - 1)
    if lags >= 1:
        q, pval = ljung_box(residuals, lags)
        out["ljung_box"] = {"lags": lags, "statistic": q, "p_value": pval}
    model = result.to_model()
    fitted = conditional_mean(model, lag_matrix(series, model.p))
    out["rmse"] = float(np.sqrt(np.mean((series[model.p:] - fitted) ** 2)))
    _write(args.out, _dump(out))


def cmd_forecast(args):
    series = read_series(args.input)
    data = json.loads(Path(args.model).read_text())
    model, seasonal = model_from_fit_json(data)
    levels = _floats(args.levels.split(","))
    dist = forecast_mc(model, series, args.h, args.B, levels, args.seed, seasonal,
                       interval_rule=args.interval_rule)
    _write(args.out, dist.to_json() + "\n")
    if args.csv:
        header = ["h", "median"] + [f"{s}_{lv:g}" for lv in sorted(dist.intervals)
                                    for s in ("lower", "upper")]
        lines = [",".join(header)]
        for k in range(dist.horizon):
            cells = [str(k + 1), str(dist.median[k])]
            for lv in sorted(dist.intervals):
                lo, hi = dist.intervals[lv][k]
                cells += [str(lo), str(hi)]
            lines.append(",".join(cells))
        Path(args.csv).write_text("\n".join(lines) + "\n")


def cmd_study(args):
    config = StudyConfig.load(args.config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = run_study(config, threads=args.threads, cache_dir=out / "cache")
    (out / "results.csv").write_text(emit_table(result, "csv"))
    (out / "results.md").write_text(emit_table(result, "markdown"))


def _model_or_series(args):
    series = read_series(args.input) if args.input else None
    model = _model_from_args(args) if args.alpha else None
    if series is None and model is None:
        raise InvalidParameterError("give --input, model flags (--alpha, --mu), or both")
    return series, model


def cmd_acf(args):
    series, model = _model_or_series(args)
    cols = {"lag": list(range(args.maxlag + 1))}
    if model is not None:
        cols["theoretical"] = model.acf(args.maxlag).tolist()
    if series is not None:
        cols["sample"] = sample_acf(series, args.maxlag).tolist()
    _write(args.out, _columns(cols))


def cmd_spectrum(args):
    series, model = _model_or_series(args)
    if series is not None:
        nu = fourier_frequencies(len(series))
        cols = {"frequency": nu.tolist(), "periodogram": periodogram(series).tolist()}
    else:
        nu = np.linspace(0.0, np.pi, args.grid)
        cols = {"frequency": nu.tolist()}
    if model is not None:
        cols["spectral_density"] = spectral_density(model, nu).tolist()
    _write(args.out, _columns(cols))


def _columns(cols):
    names = list(cols)
    lines = [",".join(names)]
    for values in zip(*cols.values()):
        lines.append(",".join(repr(v) for v in values))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_model_flags(parser, required=True):
    parser.add_argument("--family", choices=sorted(FAMILIES), default="po-inar")
    parser.add_argument("--alpha", required=required,
                        help="comma-separated thinning coefficients, lag 1 first")
    parser.add_argument("--mu", type=float, default=1.0, help="innovation mean")
    parser.add_argument("--r", type=float, default=None, help="NB overdispersion")


def build_parser():
    parser = argparse.ArgumentParser(prog="ginar", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    threads = max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity")
                  else os.cpu_count() or 1)

    p = sub.add_parser("simulate", help="simulate a series to CSV")
    _add_model_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--burnin", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a model to a CSV series")
    p.add_argument("input")
    p.add_argument("--family", choices=sorted(FAMILIES), default="po-inar")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--method", choices=sorted(METHODS), default="cml")
    p.add_argument("--transition", choices=(DAVIES, EXACT), default=DAVIES)
    p.add_argument("--quad-nodes", type=int, default=300)
    p.add_argument("--seasonal-period", type=float, default=None,
                   help="fit a seasonal log-linear innovation mean (CML only)")
    p.add_argument("--covariance", choices=("none", OBSERVED_INFORMATION, "sandwich",
                                            "bootstrap"), default="none")
    p.add_argument("--bootstrap", type=int, default=200)
    p.add_argument("--ljung-box-lags", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=threads)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("forecast", help="Monte Carlo forecast from a fitted model")
    p.add_argument("input")
    p.add_argument("--model", required=True, help="JSON written by 'ginar fit'")
    p.add_argument("--h", type=int, default=1)
    p.add_argument("--B", type=int, default=5000)
    p.add_argument("--levels", default="0.95")
    p.add_argument("--interval-rule", choices=(MIN_MASS, EQUAL_TAILED), default=MIN_MASS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.add_argument("--csv", default=None, help="also write per-horizon median/intervals")
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("study", help="run a simulation study from a YAML config")
    p.add_argument("config")
    p.add_argument("out_dir")
    p.add_argument("--threads", type=int, default=threads)
    p.set_defaults(func=cmd_study)

    for name, func in (("acf", cmd_acf), ("spectrum", cmd_spectrum)):
        p = sub.add_parser(name, help=f"theoretical and sample {name} as CSV")
        p.add_argument("--input", default=None)
        _add_model_flags(p, required=False)
        p.add_argument("--maxlag", type=int, default=20)
        p.add_argument("--grid", type=int, default=257)
        p.add_argument("--out", default="-")
        p.set_defaults(func=func)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (DataError, InvalidSeriesError, FileNotFoundError) as exc:
        print(f"ginar: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (UnsupportedMethodError, InvalidParameterError) as exc:
        print(f"ginar: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, DomainError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"ginar: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except GinarError as exc:
        print(f"ginar: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
