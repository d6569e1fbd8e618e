"""Time the compiled and pure-Python kernels on the same inputs.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--points 2000]

Prints one row per (kernel, workload) with the best time of each backend,
the speedup, and the largest difference between their outputs.
"""
import argparse
import sys
import timeit

import numpy as np

from singcert import kernels
from singcert.polyexpr import parse_system

X3_YZ = "vars x, y, z; x^3 - y*z; y^3 - x*z; z^3 - x*y"


def dense_poly(rng, n, degree):
    exps = np.array([e for e in np.ndindex(*(degree + 1,) * n) if sum(e) <= degree], dtype=np.int64)
    coefs = rng.standard_normal(len(exps)) + 1j * rng.standard_normal(len(exps))
    return exps, coefs


def workloads(rng):
    f = parse_system(X3_YZ)
    p = f.polys[0]
    yield "x3_yz", p.exps, p.coefs, p.degree
    yield "dense_deg6_n3", *dense_poly(rng, 3, 6), 6
    yield "dense_deg4_n4", *dense_poly(rng, 4, 4), 4


def best_time(fn, repeat):
    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-6)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--points", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    comp, py = kernels.compiled_backend, kernels.python_backend
    if comp is None:
        print("compiled backend not built; reinstall with Cython and a C compiler", file=sys.stderr)
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<13}{'workload':<16}{'cython (s)':>12}{'python (s)':>12}{'speedup':>9}{'max diff':>11}")
    for name, exps, coefs, deg in workloads(rng):
        exps = np.ascontiguousarray(exps, dtype=np.int64)
        coefs = np.ascontiguousarray(coefs, dtype=np.complex128)
        n = exps.shape[1]
        pts = np.ascontiguousarray(rng.standard_normal((args.points, n)) + 1j * rng.standard_normal((args.points, n)))
        x0 = np.ascontiguousarray(rng.standard_normal(n) + 1j * rng.standard_normal(n))
        cases = {
            "eval_points": lambda m: m.eval_points(exps, coefs, pts, deg),
            "taylor_shift": lambda m: m.taylor_shift(exps, coefs, x0, deg),
        }
        for kname, call in cases.items():
            tc = best_time(lambda: call(comp), args.repeat)
            tp = best_time(lambda: call(py), args.repeat)
            a, b = np.asarray(call(comp)), np.asarray(call(py))
            diff = float(np.abs(a - b).max() / max(1.0, np.abs(b).max()))
            print(f"{kname:<13}{name:<16}{tc:>12.2e}{tp:>12.2e}{tp / tc:>8.1f}x{diff:>11.1e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
