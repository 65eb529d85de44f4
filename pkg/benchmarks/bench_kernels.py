"""Benchmark the hot kernels under both backends.

Runs the same workload twice in subprocesses, once with numba active and
once with TRACELAB_DISABLE_NUMBA=1 (pure NumPy/interpreter path), and
prints a timing table.  Usage:  python benchmarks/bench_kernels.py
"""

import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, os, time
import numpy as np
from tracelab import kernels as K
from tracelab._backend import backend_name

results = {"backend": backend_name()}

# warm the JIT (compilation time must not pollute the timings)
n = 400
diag = np.full(n, 2.0); off = np.full(n - 1, -1.0)
K.tridiag_eigvals_sturm(diag, off, 2)
K.shoot_classify(1.5, 1, 3.0, 0, 1e-2, 5.0, 1e-12)
K.shoot_profile(1.5, 1, 3.0, 0, 1e-2, 5.0, 1e-12, 4)
psis = np.ones((1, n), dtype=np.complex128)
K.cayley_evolve(diag, off, psis, 1e-3, 4, 2)
K.enumerate_sum_squares(2, 100)

def timed(name, fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    results[name] = best

# 1) Sturm bisection: 8 eigenvalues of a 6000-point Dirichlet Laplacian
n = 6000
h = np.pi / (n + 1)
diag = np.full(n, 2.0 / h / h)
off = np.full(n - 1, -1.0 / h / h)
timed("sturm_bisection_6000", lambda: K.tridiag_eigvals_sturm(diag, off, 8))

# 2) shooting: one classify sweep at the dual separatrix
timed("shoot_classify_dual", lambda: K.shoot_classify(1.8937, 1, 0.2, 1, 2.5e-4, 40.0, 1e-12))

# 3) Cayley evolution: 2 modes, 1200 points, 2000 steps
m, ng = 2, 1200
hx = 18.0 / (ng + 1)
x = -9.0 + hx * np.arange(1, ng + 1)
diag2 = 2.0 / hx / hx + x * x
off2 = np.full(ng - 1, -1.0 / hx / hx)
psi = np.exp(-0.5 * x * x)
psi = psi / np.sqrt(np.sum(psi**2) * hx)
psis = np.vstack([psi, x * psi / np.sqrt(np.sum((x * psi) ** 2) * hx)]).astype(np.complex128)
timed("cayley_2x1200x2000", lambda: K.cayley_evolve(diag2, off2, psis, 1e-3, 2000, 500))

# 4) lattice enumeration d=3
timed("lattice_d3_s40000", lambda: K.enumerate_sum_squares(3, 40000))

print(json.dumps(results))
"""


def run_backend(disable_numba):
    env = dict(os.environ)
    env["TRACELAB_DISABLE_NUMBA"] = "1" if disable_numba else "0"
    out = subprocess.run(
        [sys.executable, "-c", WORKLOAD], env=env, capture_output=True, text=True, check=True
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    numba = run_backend(disable_numba=False)
    plain = run_backend(disable_numba=True)
    keys = [k for k in numba if k != "backend"]
    width = max(len(k) for k in keys)
    print(f"{'kernel':<{width}}  {'numba':>12}  {'numpy':>12}  {'speedup':>8}")
    for k in keys:
        sp = plain[k] / numba[k] if numba[k] > 0 else float("inf")
        print(f"{k:<{width}}  {numba[k]:>10.4f}s  {plain[k]:>10.4f}s  {sp:>7.1f}x")


if __name__ == "__main__":
    main()
