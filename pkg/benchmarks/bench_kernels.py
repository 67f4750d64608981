"""Compiled vs numpy kernels, per call and for a full N=100 solve.

Run with ``python benchmarks/bench_kernels.py``.
"""
import os
import subprocess
import sys
import timeit

import numpy as np

from sccbethe import _kernels_py

try:
    from sccbethe import _kernels
except ImportError:
    _kernels = None

SOLVE = ("import time; from sccbethe import ModelParams, solve_rapidities, BACKEND; "
         "t=time.perf_counter(); [solve_rapidities(ModelParams(100, 1, q)) for q in (4/3, 6, 60, 1000)]; "
         "print(BACKEND, time.perf_counter()-t)")


def sample(n, seed=0):
    rng = np.random.default_rng(seed)
    poles = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    offsets = rng.uniform(0.05, 0.9, n) * np.where(rng.random(n) < 0.5, -1.0, 1.0)
    return poles, offsets


def per_call(module, n, repeat=200):
    poles, offsets = sample(n)
    a, b = module.pole_inverses(poles, offsets)
    cases = {
        "richardson_system": lambda: module.richardson_system(poles, offsets, 1.5, 0.25, 0.5),
        "log_potential": lambda: module.log_potential(poles, offsets, 1.5, 0.25, 0.5),
        "ansatz_log_coefficients": lambda: module.ansatz_log_coefficients(a, b),
    }
    return {name: min(timeit.repeat(fn, number=repeat, repeat=5)) / repeat for name, fn in cases.items()}


def full_solve(pure):
    env = dict(os.environ, SCCBETHE_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", SOLVE], env=env, capture_output=True, text=True, check=True)
    backend, seconds = out.stdout.split()
    return backend, float(seconds)


def main():
    for n in (10, 50):
        py = per_call(_kernels_py, n)
        cy = per_call(_kernels, n) if _kernels else {}
        for name in py:
            line = f"n={n:3d} {name:24s} python {py[name] * 1e6:9.2f} us"
            if cy:
                line += f"  compiled {cy[name] * 1e6:9.2f} us  speedup {py[name] / cy[name]:6.1f}x"
            print(line)
    for pure in (True, False):
        backend, seconds = full_solve(pure)
        print(f"N=100 spectra at 4 couplings, backend={backend}: {seconds:.2f} s")


if __name__ == "__main__":
    main()
