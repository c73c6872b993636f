"""Time the numba and numpy kernel backends on the hot paths.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is run once per backend to warm up (numba compiles on first
call), then timed as the best of ``--repeat`` runs. The two backends must
agree, so every case is also checked for equal output.
"""
import argparse
import time

import numpy as np

from ginar import GinarModel, InnovationSpec
from ginar._backend import set_backend
from ginar.estimation.saddle import saddle_terms
from ginar.forecast import forecast_paths
from ginar.transition import conv_series_probs, davies_series_probs, default_rule, lag_matrix


def cases():
    model = GinarModel((0.3, 0.2), InnovationSpec("poisson", 1.5))
    series = model.simulate(2000, np.random.default_rng(0))
    x, lags = series[2:], lag_matrix(series, 2)
    rule = default_rule(300)
    mu_path = np.full(len(x), 1.5)
    return {
        "simulate n=20k": lambda: model.simulate(20_000, np.random.default_rng(1)),
        "forecast B=20k h=10": lambda: forecast_paths(model, series, 10, 20_000, 2),
        "davies n=2000 (per-time mean)": lambda: davies_series_probs(model, x, lags, rule, mu_path),
        "convolution n=2000": lambda: conv_series_probs(model, x, lags),
        "saddlepoint n=2000": lambda: saddle_terms(series, model)[0],
    }


def best_of(func, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        func()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    print(f"{'kernel':32s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s}  equal")
    for name, func in cases().items():
        results, timings = {}, {}
        for backend in ("numba", "numpy"):
            set_backend(backend)
            results[backend] = func()
            timings[backend] = best_of(func, args.repeat)
        set_backend("numba")
        equal = np.allclose(results["numba"], results["numpy"], rtol=1e-10, atol=1e-12)
        print(f"{name:32s} {1e3 * timings['numba']:11.2f} {1e3 * timings['numpy']:11.2f} "
              f"{timings['numpy'] / timings['numba']:8.1f}  {equal}")


if __name__ == "__main__":
    main()
