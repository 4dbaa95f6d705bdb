#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Runs each backend in this process (numba) and by re-importing with
BGKIT_PURE_NUMPY=1 semantics (direct calls to the fallback functions), on
the two hot loops: the exhaustive four-point scan and Floyd-Warshall.

    python3 benchmarks/bench_kernels.py [--sizes 40 80 120]
"""

import argparse
import time

import numpy as np

from bgkit import _kernels


def metric_matrix(n, seed):
    rng = np.random.default_rng(seed)
    coords = rng.integers(0, 100, size=(n, 3))
    return np.abs(coords[:, None, :] - coords[None, :, :]).sum(axis=2).astype(np.int64)


def weight_matrix(n, seed):
    rng = np.random.default_rng(seed)
    w = np.full((n, n), _kernels.INF, dtype=np.int64)
    np.fill_diagonal(w, 0)
    for _ in range(4 * n):
        i, j = rng.integers(0, n, 2)
        if i != j:
            w[i, j] = w[j, i] = int(rng.integers(1, 30))
    return w


def timed(fn, *args, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", type=int, nargs="+", default=[40, 80, 120])
    args = parser.parse_args()

    if _kernels.backend() != "numba":
        print("numba backend unavailable; only the numpy fallback is timed")

    print(f"{'kernel':<16}{'n':>6}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for n in args.sizes:
        d = metric_matrix(n, seed=n)
        if _kernels.backend() == "numba":
            _kernels._four_point_jit(d[:6, :6])      # warm the jit
            t_nb, r_nb = timed(_kernels._four_point_jit, d)
        else:
            t_nb, r_nb = float("nan"), None
        t_np, r_np = timed(_kernels._four_point_numpy, d)
        if r_nb is not None and r_nb[0] != r_np[0]:
            raise AssertionError("backend disagreement in four_point")
        ratio = t_np / t_nb if t_nb == t_nb else float("nan")
        print(f"{'four_point':<16}{n:>6}{t_nb:>12.4f}{t_np:>12.4f}{ratio:>10.1f}")

    for n in args.sizes:
        w = weight_matrix(n * 4, seed=n)
        if _kernels.backend() == "numba":
            _kernels._floyd_warshall_jit(w[:6, :6].copy())
            t_nb, r_nb = timed(_kernels._floyd_warshall_jit, w.copy())
        else:
            t_nb, r_nb = float("nan"), None
        t_np, r_np = timed(_kernels._floyd_warshall_numpy, w.copy())
        if r_nb is not None and not (r_nb == r_np).all():
            raise AssertionError("backend disagreement in floyd_warshall")
        ratio = t_np / t_nb if t_nb == t_nb else float("nan")
        print(f"{'floyd_warshall':<16}{n * 4:>6}{t_nb:>12.4f}{t_np:>12.4f}{ratio:>10.1f}")


if __name__ == "__main__":
    main()
