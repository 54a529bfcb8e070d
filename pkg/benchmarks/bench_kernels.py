"""Throughput comparison of the accelerated kernels against the pure-numpy
fallback, plus an end-to-end scenario timing for both engines.

Run as a script::

    python benchmarks/bench_kernels.py [--grid-points N] [--repeats R]

The accelerated/fallback split is decided at import time from the
GAUSSRING_NO_NUMBA environment variable, so this script runs the fallback
in a subprocess to time both paths in one invocation.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _time(fn, repeats: int) -> float:
    fn()  # warm-up (includes jit compilation when enabled)
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_suite(grid_points: int, repeats: int) -> dict:
    from gaussring._kernels import USE_NUMBA, convolve_full, interp_complex
    from gaussring.engine import run_scenario
    from gaussring.gaussdyn import NonlinearCoupling
    from gaussring.lingrid import KGrid
    from gaussring.ringscene import RingDefectParams, build_fwm_scenario

    rng = np.random.default_rng(7)
    n = grid_points
    a = rng.normal(size=n) + 1j * rng.normal(size=n)
    b = rng.normal(size=n) + 1j * rng.normal(size=n)
    table = rng.normal(size=2 * n - 1) + 1j * rng.normal(size=2 * n - 1)
    args = rng.uniform(-1.0, 1.0, size=(n, n))

    grid = KGrid.default(grid_points)
    scenario = build_fwm_scenario(RingDefectParams())
    coupling = NonlinearCoupling(1e6)

    results = {
        "accelerated": USE_NUMBA,
        "grid_points": grid_points,
        "convolve_full_s": _time(lambda: convolve_full(a, b, grid.dk), repeats),
        "interp_complex_s": _time(
            lambda: interp_complex(-1.0, 2.0 / (2 * n - 2), table, args), repeats),
        "scenario_perturbative_s": _time(
            lambda: run_scenario(scenario, coupling, grid,
                                 engine="perturbative"), max(1, repeats // 3)),
    }
    if grid_points <= 101:
        results["scenario_full_s"] = _time(
            lambda: run_scenario(scenario, coupling, grid, engine="full"), 1)
    return results


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--grid-points", type=int, default=101)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--json", action="store_true",
                        help="emit one JSON object instead of a table")
    parser.add_argument("--single", action="store_true",
                        help="only time the path selected by the environment")
    args = parser.parse_args()

    here = run_suite(args.grid_points, args.repeats)
    if args.single:
        print(json.dumps(here, indent=None if args.json else 2))
        return 0

    env = dict(os.environ)
    env["GAUSSRING_NO_NUMBA"] = "0" if here["accelerated"] else "1"
    other = json.loads(subprocess.check_output(
        [sys.executable, os.path.abspath(__file__), "--single", "--json",
         "--grid-points", str(args.grid_points), "--repeats", str(args.repeats)],
        env=env))

    fast, slow = (here, other) if here["accelerated"] else (other, here)
    if args.json:
        print(json.dumps({"accelerated": fast, "fallback": slow}))
        return 0
    print(f"grid points: {args.grid_points}")
    print(f"{'kernel':<26}{'accelerated':>14}{'fallback':>14}{'speedup':>10}")
    for key in sorted(set(fast) & set(slow)):
        if not key.endswith("_s"):
            continue
        name = key[:-2]
        ratio = slow[key] / fast[key] if fast[key] > 0 else float("inf")
        print(f"{name:<26}{fast[key]:>14.3e}{slow[key]:>14.3e}{ratio:>9.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
