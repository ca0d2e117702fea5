#!/usr/bin/env python3
"""Benchmark the numba kernels against their numpy fallbacks.

Run: python benchmarks/bench_kernels.py [--n 200] [--repeats 5]

The same generated workload is pushed through both implementations of each
kernel; times are best-of-repeats after a warmup call (which also absorbs
JIT compilation). Setting SITC_DISABLE_NUMBA=1 would remove the numba side,
so run this with the flag unset.
"""

import argparse
import time

import numpy as np

from sitc import _kernels
from sitc.collapse import collapse
from sitc.distance import build_graph
from sitc.model import build_orthogonal_cp_model, make_weight_vectors, sample_observations


def best_of(fn, repeats):
    fn()  # warmup / compile
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_cell_sums(n, repeats, rng):
    n_entries = 50 * n
    rows = rng.integers(0, n, n_entries)
    cols = rng.integers(0, n, n_entries)
    contrib = rng.uniform(-1, 1, n_entries)
    nb = best_of(lambda: _kernels.cell_sums_nb(rows, cols, contrib, n, n), repeats)
    np_t = best_of(lambda: _kernels.cell_sums_np(rows, cols, contrib, n, n), repeats)
    return f"cell_sums ({n_entries} entries -> {n}x{n})", nb, np_t


def bench_bfs(n, repeats, rng):
    kappa = 0.6
    p = float(n) ** (kappa - 2)
    model = build_orthogonal_cp_model((n, n, n), 1, [1.0], "cosine", seed=0)
    weights = make_weight_vectors(model, "uniform")
    obs = sample_observations(model, min(1.0, 3 * p), 0.0, seed=0)
    g = build_graph(collapse(obs, 0, 1, weights))
    args = (g.indptr_left, g.indices_left, g.weights_left,
            g.indptr_right, g.indices_right, g.weights_right)

    def run(fn):
        for root in range(n):
            fn(*args, root, 3, n, n)

    nb = best_of(lambda: run(_kernels.bfs_nb), repeats)
    np_t = best_of(lambda: run(_kernels.bfs_np), repeats)
    return f"bfs all roots ({g.n_edges} edges, n={n})", nb, np_t


def bench_nn_scatter(n, repeats, rng):
    dims = (n, n, n)
    n_obs = max(200, n * 6)
    idx = np.column_stack([rng.integers(0, d, n_obs) for d in dims]).astype(np.int64)
    vals = rng.uniform(-1, 1, n_obs)
    ptrs, inds = [], []
    for d in dims:
        B = rng.random((d, d)) < 0.2
        np.fill_diagonal(B, True)
        counts = B.sum(axis=0)
        ptr = np.zeros(d + 1, dtype=np.int64)
        np.cumsum(counts, out=ptr[1:])
        _, c = np.nonzero(B.T)
        ptrs.append(ptr)
        inds.append(c.astype(np.int64))

    def run(fn):
        num = np.zeros(dims)
        den = np.zeros(dims)
        fn(num, den, idx, vals, ptrs, inds)

    nb = best_of(lambda: run(_kernels.nn_scatter_nb), repeats)
    np_t = best_of(lambda: run(_kernels.nn_scatter_np), repeats)
    return f"nn_scatter ({n_obs} obs into {n}^3, 20% neighbors)", nb, np_t


def bench_jacobi(n, repeats, rng):
    m = min(n, 120)
    A = rng.uniform(-1, 1, (m, m))

    def run(fn):
        G = A.copy()
        V = np.eye(m)
        fn(G, V)

    nb = best_of(lambda: run(_kernels.jacobi_sweeps_nb), repeats)
    np_t = best_of(lambda: run(_kernels.jacobi_sweeps_np), repeats)
    return f"jacobi_sweeps ({m}x{m})", nb, np_t


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=200)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    if not _kernels.NUMBA_AVAILABLE:
        raise SystemExit("numba unavailable (or SITC_DISABLE_NUMBA set); nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<48} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for bench in (bench_cell_sums, bench_bfs, bench_nn_scatter, bench_jacobi):
        name, nb, np_t = bench(args.n, args.repeats, rng)
        print(f"{name:<48} {nb * 1e3:>8.2f}ms {np_t * 1e3:>8.2f}ms {np_t / nb:>7.1f}x")


if __name__ == "__main__":
    main()
