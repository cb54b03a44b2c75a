#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python/NumPy path.

The compiled entry points come from satphase._kernels (numba @njit); the
*_py handles are the same functions uncompiled, i.e. exactly what runs
when SATPHASE_NUMBA=0.  Results must be identical; only time differs.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from satphase import _kernels
from satphase.instances import to_cnf
from satphase.instances import gen_ksat, gen_kxorsat
from satphase.solver import cnf_arrays, xor_system


def timed(fn, *args, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_dpll(repeat: int) -> None:
    inst = gen_ksat(3, 50, 250, seed=11)  # unsatisfiable, forces a full refutation
    f = to_cnf(inst)
    lits, starts = cnf_arrays(f)
    _kernels.dpll_search(lits, starts, f.n, -1, 0)  # compile outside the clock
    t_jit, r_jit = timed(_kernels.dpll_search, lits, starts, f.n, -1, 0, repeat=repeat)
    t_py, r_py = timed(_kernels.dpll_search_py, lits, starts, f.n, -1, 0, repeat=repeat)
    assert r_jit[0] == r_py[0] and r_jit[2] == r_py[2]
    report("dpll_search (3-SAT n=50 c=5, %d nodes)" % r_jit[2], t_jit, t_py)


def bench_gauss(repeat: int) -> None:
    inst = gen_kxorsat(3, 512, 640, seed=4)
    rows, rhs = xor_system(inst)
    _kernels.gf2_solve(rows.copy(), rhs.copy(), inst.n)
    t_jit, r_jit = timed(lambda: _kernels.gf2_solve(rows.copy(), rhs.copy(), inst.n), repeat=repeat)
    t_py, r_py = timed(lambda: _kernels.gf2_solve_py(rows.copy(), rhs.copy(), inst.n), repeat=repeat)
    assert r_jit[0] == r_py[0] and r_jit[2] == r_py[2]
    report("gf2_solve (3-XOR n=512 m=640)", t_jit, t_py)


def bench_brute(repeat: int) -> None:
    inst = gen_ksat(3, 18, 120, seed=21)  # unsatisfiable: scans all 2^18 codes
    f = to_cnf(inst)
    lits, starts = cnf_arrays(f)
    _kernels.brute_first_sat(lits, starts, f.n)
    t_jit, r_jit = timed(_kernels.brute_first_sat, lits, starts, f.n, repeat=repeat)
    t_py, r_py = timed(_kernels.brute_first_sat_py, lits, starts, f.n, repeat=repeat)
    assert r_jit == r_py
    report("brute_first_sat (n=18, unsat)", t_jit, t_py)


def report(name: str, t_jit: float, t_py: float) -> None:
    print(f"{name:<48s} jit {t_jit*1e3:9.2f} ms"
          f"   pure {t_py*1e3:9.2f} ms   speedup {t_py/t_jit:6.1f}x")


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _kernels.JIT_ENABLED:
        print("note: SATPHASE_NUMBA disabled or numba missing; both paths are pure")
    bench_dpll(args.repeat)
    bench_gauss(args.repeat)
    bench_brute(args.repeat)


if __name__ == "__main__":
    main()
