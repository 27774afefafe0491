#!/usr/bin/env python3
"""Benchmark the fused jit kernel against the generic numpy driver.

Both paths produce the same iterates, statuses and counts (see the backend
agreement tests); this script only measures speed.  Run once with numba
enabled (default) and once with FRACROOTS_DISABLE_NUMBA=1 to see the plain
interpretation of the same kernel source.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from fracroots import (SolverSettings, alpha_sweep, default_alpha_grid,
                       fixed_point_solve, make_residual, sweep_thresholds)
from fracroots._accel import backend_name
from fracroots.dixit_pindyck import _solve_outcome
from fracroots import reference


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_scenario_solves(repeat: int) -> None:
    print(f"scenario solves (best of {repeat} runs per row)")
    print(f"{'row':>4} {'fused kernel':>16} {'generic driver':>16} {'speedup':>9}")
    for row in reference.ROWS:
        problem = reference.scenario_problem(row)
        settings = SolverSettings(alpha=row.alpha)
        f = make_residual(problem.constants)
        fused = best_of(lambda: _solve_outcome(problem, settings, False), repeat)
        generic = best_of(lambda: fixed_point_solve(f, problem.x0, settings), repeat)
        print(f"{row.index:>4} {fused * 1e6:>13.1f} us {generic * 1e6:>13.1f} us "
              f"{generic / fused:>8.1f}x")


def bench_sweeps(repeat: int) -> None:
    row = reference.ROWS[0]
    problem = reference.scenario_problem(row)
    grid = default_alpha_grid()
    print(f"\nfull-grid sweeps ({len(grid)} orders, best of {repeat} runs)")
    fused = best_of(lambda: sweep_thresholds(problem, grid=grid), repeat)
    generic = best_of(
        lambda: alpha_sweep(make_residual(problem.constants), problem.x0, grid=grid),
        repeat)
    print(f"  scenario sweep   fused {fused * 1e3:>9.1f} ms   "
          f"generic {generic * 1e3:>9.1f} ms   {generic / fused:.1f}x")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=50,
                        help="timing repetitions per measurement (default 50)")
    parser.add_argument("--sweep-repeat", type=int, default=3,
                        help="repetitions for the sweep measurements (default 3)")
    args = parser.parse_args()

    print(f"active hot-loop backend: {backend_name()}")
    # warm both paths so jit compilation stays out of the timings
    row = reference.ROWS[0]
    problem = reference.scenario_problem(row)
    settings = SolverSettings(alpha=row.alpha)
    _solve_outcome(problem, settings, False)
    fixed_point_solve(make_residual(problem.constants), problem.x0, settings)
    print()
    bench_scenario_solves(args.repeat)
    bench_sweeps(args.sweep_repeat)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
