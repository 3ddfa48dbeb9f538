"""Compiled kernels vs the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints the best-of-``repeat`` wall time of each kernel for both backends,
the speedup, and the max abs difference of their outputs.
"""

import argparse
import timeit

import numpy as np

from heraldgen import _kernels_py as py

try:
    from heraldgen import _ckernels as cy
except ImportError:  # pragma: no cover
    cy = None


def cases():
    W = np.array([[np.cos(0.7), np.exp(0.3j) * np.sin(0.7)],
                  [-np.exp(-0.3j) * np.sin(0.7), np.cos(0.7)]])
    x = np.linspace(-8, 8, 4001)
    Q, P = np.meshgrid(np.linspace(-5, 5, 81), np.linspace(-5, 5, 81), indexing="ij")
    rng = np.random.default_rng(0)
    psi = rng.normal(size=30) + 1j * rng.normal(size=30)
    psi /= np.linalg.norm(psi)
    for D in (12, 21, 31):
        yield f"beamsplitter_tensor D={D}", "beamsplitter_tensor", (W[0, 0], W[0, 1], W[1, 0], W[1, 1], D)
    for D in (30, 42):
        yield f"squeezing_matrix D={D}", "squeezing_matrix", (0.8, D)
        yield f"displacement_matrix D={D}", "displacement_matrix", (0.6 + 0.4j, D)
    yield "hermite_functions n=100, 4001 pts", "hermite_functions", (x, 100)
    yield "wigner_pure N=30, 81x81", "wigner_pure", (psi, Q, P)


def best_time(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if cy is None:
        print("compiled extension not built; nothing to compare")
        return 1
    print(f"{'kernel':38s} {'cython [ms]':>12s} {'python [ms]':>12s} {'speedup':>8s} {'max diff':>10s}")
    for label, name, fargs in cases():
        fc, fp = getattr(cy, name), getattr(py, name)
        diff = float(np.max(np.abs(np.asarray(fc(*fargs)) - np.asarray(fp(*fargs)))))
        tc = best_time(fc, fargs, args.repeat)
        tp = best_time(fp, fargs, args.repeat)
        print(f"{label:38s} {1e3 * tc:12.3f} {1e3 * tp:12.3f} {tp / tc:8.1f} {diff:10.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
