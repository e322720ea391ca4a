"""Compare the compiled and NumPy simplex kernels.

Times (a) raw Gauss-Jordan pivots on a dense tableau and (b) full
reference-basin outflow plans, then checks that both backends produce identical
schedules.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from stormrtc.hydraulics import PondParams
from stormrtc.optimizer import plan_outflows
from stormrtc.optimizer.kernels import available_backends, load_backend


def design_forecast(n_c: int = 720) -> np.ndarray:
    k = np.arange(n_c + 1)
    return np.maximum(0.0, 13.2 * (1.0 - np.abs(k - 30) / 20.0))


def bench_pivots(name: str, m: int = 720, n: int = 2200, pivots: int = 200, seed: int = 0) -> float:
    kern = load_backend(name)
    rng = np.random.default_rng(seed)
    # sparse-ish tableau, like the banded pond LP after a few pivots
    T = rng.standard_normal((m, n)) * (rng.random((m, n)) < 0.05)
    d = rng.standard_normal(n)
    rows = rng.integers(0, m, pivots)
    cols = rng.integers(0, n, pivots)
    T[rows, cols] += 3.0
    start = time.perf_counter()
    for r, q in zip(rows, cols):
        if T[r, q] != 0.0:
            kern.pivot(T, d, int(r), int(q))
    return time.perf_counter() - start


def bench_plan(name: str, repeat: int):
    params = PondParams(51245.833, 1.2, 2.54, 300.0, 720)
    forecast = design_forecast()
    plan = plan_outflows(params, 0.0, forecast, initial_outflow=0.0, backend=name)
    start = time.perf_counter()
    for _ in range(repeat):
        plan_outflows(params, 0.0, forecast, initial_outflow=0.0, backend=name)
    return (time.perf_counter() - start) / repeat, plan


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    names = available_backends()
    plans = {}
    print(f"{'backend':8s} {'200 pivots (s)':>15s} {'design plan (s)':>17s} {'iterations':>11s}")
    for name in names:
        tp = bench_pivots(name)
        tplan, plan = bench_plan(name, args.repeat)
        plans[name] = plan
        print(f"{name:8s} {tp:15.4f} {tplan:17.4f} {plan.iterations:11d}")
    if len(plans) == 2:
        a, b = plans.values()
        same = np.array_equal(a.outflows, b.outflows) and np.array_equal(a.depths, b.depths)
        print(f"schedules identical across backends: {same}")
    else:
        print("compiled extension not built; only the NumPy backend was timed")


if __name__ == "__main__":
    main()
