#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy twins.

Covers the three hot per-iteration kernels (residual assembly, tridiagonal
assembly, Thomas solve) and one full time step end to end.

Usage:
    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --sizes 1000 10000 100000 --repeats 50
"""
import argparse
import time

import numpy as np

from pmetraj import (Grid, SolverParams, advance, bootstrap, make_problem,
                     quadratic_bump)
from pmetraj import _kernels
from pmetraj.checks import random_admissible
from pmetraj.functional import build_coefficients


def _timeit(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _setup(M, rng):
    grid = Grid(0.0, 1.0, M)
    spec = make_problem(2.0, grid, quadratic_bump)
    params = SolverParams(tau=grid.h)
    x_curr = random_admissible(rng, grid, scale=0.2)
    x_new = random_admissible(rng, grid, scale=0.2)
    coeffs = build_coefficients(x_curr, x_curr, spec, params)
    return grid, spec, params, x_curr, x_new, coeffs


def bench_kernels(sizes, repeats):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<10} {'M':>8} {'numba (ms)':>12} {'numpy (ms)':>12} {'speedup':>9}")
    print("-" * 56)
    for M in sizes:
        grid, spec, params, x_curr, x_new, coeffs = _setup(M, rng)
        args = (x_new, x_curr, coeffs.slope_curr, coeffs.mass, spec.f0_cells,
                grid.h, params.tau, params.a0, params.eps_switch)
        pairs = {
            "residual": (lambda: _kernels.residual_interior_numba(*args),
                         lambda: _kernels.residual_interior_numpy(*args)),
            "hessian": (lambda: _kernels.hessian_tridiag_numba(
                            x_new, coeffs.slope_curr, coeffs.mass, spec.f0_cells,
                            grid.h, params.tau, params.a0, params.eps_switch),
                        lambda: _kernels.hessian_tridiag_numpy(
                            x_new, coeffs.slope_curr, coeffs.mass, spec.f0_cells,
                            grid.h, params.tau, params.a0, params.eps_switch)),
        }
        diag, off = _kernels.hessian_tridiag_numpy(
            x_new, coeffs.slope_curr, coeffs.mass, spec.f0_cells,
            grid.h, params.tau, params.a0, params.eps_switch)
        rhs = rng.standard_normal(diag.shape[0])
        pairs["thomas"] = (lambda: _kernels.thomas_spd_numba(diag, off, rhs),
                           lambda: _kernels.thomas_spd_numpy(diag, off, rhs))

        for name, (fast, slow) in pairs.items():
            fast()  # JIT warmup
            t_fast = _timeit(fast, repeats)
            t_slow = _timeit(slow, max(repeats // 10, 3))
            print(f"{name:<10} {M:>8} {t_fast * 1e3:>12.4f} {t_slow * 1e3:>12.4f} "
                  f"{t_slow / t_fast:>8.1f}x")
    print()


def bench_full_step(sizes, repeats):
    print(f"{'full step':<10} {'M':>8} {'numba (ms)':>12} {'numpy (ms)':>12} {'speedup':>9}")
    print("-" * 56)
    saved = (_kernels.residual_interior, _kernels.hessian_tridiag, _kernels.thomas_spd)
    lanes = {
        "numba": (_kernels.residual_interior_numba, _kernels.hessian_tridiag_numba,
                  _kernels.thomas_spd_numba),
        "numpy": (_kernels.residual_interior_numpy, _kernels.hessian_tridiag_numpy,
                  _kernels.thomas_spd_numpy),
    }
    try:
        for M in sizes:
            grid = Grid(0.0, 1.0, M)
            spec = make_problem(2.0, grid, quadratic_bump)
            # the decrement floor scales like eps/h; keep the stopping
            # tolerance above it at stress sizes (this measures speed only)
            params = SolverParams(tau=grid.h, newton_tol_lambda=1e-7)
            times = {}
            for lane, fns in lanes.items():
                (_kernels.residual_interior, _kernels.hessian_tridiag,
                 _kernels.thomas_spd) = fns
                state = bootstrap(spec)
                state, _ = advance(state, spec, params)  # warm start + JIT
                reps = repeats if lane == "numba" else max(repeats // 10, 2)

                def one_step(state=state):
                    advance(state, spec, params)

                times[lane] = _timeit(one_step, reps)
            print(f"{'advance':<10} {M:>8} {times['numba'] * 1e3:>12.4f} "
                  f"{times['numpy'] * 1e3:>12.4f} "
                  f"{times['numpy'] / times['numba']:>8.1f}x")
    finally:
        (_kernels.residual_interior, _kernels.hessian_tridiag,
         _kernels.thomas_spd) = saved
    print()


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[1000, 10000, 100000])
    parser.add_argument("--repeats", type=int, default=30)
    args = parser.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    bench_kernels(args.sizes, args.repeats)
    bench_full_step(args.sizes, args.repeats)


if __name__ == "__main__":
    main()
