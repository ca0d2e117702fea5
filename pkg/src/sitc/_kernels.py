"""Hot numeric kernels with numba and pure-numpy implementations.

Every kernel exists twice: a ``*_nb`` version compiled with numba's
``@njit`` and a ``*_np`` version written against plain numpy. The active
implementation is chosen at import time. Set ``SITC_DISABLE_NUMBA=1`` to
force the numpy path (useful on platforms without a working numba, and
for the benchmark in ``benchmarks/bench_kernels.py``).

Both paths perform the same floating-point operations in the same order
per accumulator, so switching paths does not change results beyond what
the dual-path tests pin down.
"""

from __future__ import annotations

import math
import os

import numpy as np

_DISABLE = os.environ.get("SITC_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

if not _DISABLE:
    try:
        from numba import njit

        NUMBA_AVAILABLE = True
    except ImportError:  # pragma: no cover - exercised only without numba
        NUMBA_AVAILABLE = False
else:
    NUMBA_AVAILABLE = False

USING_NUMBA = NUMBA_AVAILABLE


# ---------------------------------------------------------------------------
# Per-cell compensated accumulation (collapse and pair-statistic scatter).
# ---------------------------------------------------------------------------

def cell_sums_np(rows, cols, contrib, n_rows, n_cols):
    """Kahan-compensated per-cell sums and counts of ``contrib``.

    Accumulation order within each cell equals the input entry order,
    matching the sequential kernel bit for bit.
    """
    sums = np.zeros((n_rows, n_cols))
    counts = np.zeros((n_rows, n_cols), dtype=np.int64)
    n = rows.shape[0]
    if n == 0:
        return sums, counts
    # Stable sort groups entries by cell while preserving input order inside.
    order = np.lexsort((cols, rows))
    cell = rows[order].astype(np.int64) * n_cols + cols[order]
    vals = contrib[order]
    flat_counts = np.bincount(cell, minlength=n_rows * n_cols)
    new_seg = np.empty(n, dtype=bool)
    new_seg[0] = True
    new_seg[1:] = cell[1:] != cell[:-1]
    seg_start = np.flatnonzero(new_seg)
    seg_id = np.cumsum(new_seg) - 1
    rank = np.arange(n) - seg_start[seg_id]
    flat_sums = np.zeros(n_rows * n_cols)
    comp = np.zeros(n_rows * n_cols)
    for k in range(int(rank.max()) + 1):
        sel = rank == k
        c = cell[sel]
        x = vals[sel] - comp[c]
        t = flat_sums[c] + x
        comp[c] = (t - flat_sums[c]) - x
        flat_sums[c] = t
    return flat_sums.reshape(n_rows, n_cols), flat_counts.reshape(n_rows, n_cols).astype(np.int64)


if NUMBA_AVAILABLE:

    @njit(cache=True)
    def _cell_sums_jit(rows, cols, contrib, n_rows, n_cols):
        sums = np.zeros((n_rows, n_cols))
        comp = np.zeros((n_rows, n_cols))
        counts = np.zeros((n_rows, n_cols), dtype=np.int64)
        for e in range(rows.shape[0]):
            a = rows[e]
            b = cols[e]
            x = contrib[e] - comp[a, b]
            t = sums[a, b] + x
            comp[a, b] = (t - sums[a, b]) - x
            sums[a, b] = t
            counts[a, b] += 1
        return sums, counts

    def cell_sums_nb(rows, cols, contrib, n_rows, n_cols):
        return _cell_sums_jit(
            np.ascontiguousarray(rows, dtype=np.int64),
            np.ascontiguousarray(cols, dtype=np.int64),
            np.ascontiguousarray(contrib, dtype=np.float64),
            n_rows,
            n_cols,
        )

    cell_sums = cell_sums_nb
else:
    cell_sums_nb = None
    cell_sums = cell_sums_np


# ---------------------------------------------------------------------------
# Bipartite BFS with path products.
#
# Vertices at each frontier are expanded in ascending index order and the
# first claimant wins, so the parent of every vertex is the smallest-index
# adjacent vertex in the previous level. Returns per-side level, parent and
# path-product arrays (-1 level means unreached).
# ---------------------------------------------------------------------------

def bfs_np(indptr_l, indices_l, weights_l, indptr_r, indices_r, weights_r,
           root, max_depth, n_left, n_right):
    level = [np.full(n_left, -1, dtype=np.int64), np.full(n_right, -1, dtype=np.int64)]
    parent = [np.full(n_left, -1, dtype=np.int64), np.full(n_right, -1, dtype=np.int64)]
    prod = [np.zeros(n_left), np.zeros(n_right)]
    indptr = [indptr_l, indptr_r]
    indices = [indices_l, indices_r]
    weights = [weights_l, weights_r]

    level[0][root] = 0
    prod[0][root] = 1.0
    frontier = np.array([root], dtype=np.int64)
    depth_reached = 0
    for d in range(1, max_depth + 1):
        src = (d - 1) % 2
        dst = d % 2
        ptr = indptr[src]
        deg = ptr[frontier + 1] - ptr[frontier]
        total = int(deg.sum())
        if total == 0:
            break
        starts = np.repeat(ptr[frontier], deg)
        offs = starts + (np.arange(total) - np.repeat(np.cumsum(deg) - deg, deg))
        nbr = indices[src][offs]
        wts = weights[src][offs]
        par = np.repeat(frontier, deg)
        unvis = level[dst][nbr] == -1
        if not unvis.any():
            break
        # unique returns first occurrences: frontier ascending and adjacency
        # ascending means the first occurrence carries the smallest parent.
        nbr_u, first = np.unique(nbr[unvis], return_index=True)
        par_u = par[unvis][first]
        wts_u = wts[unvis][first]
        level[dst][nbr_u] = d
        parent[dst][nbr_u] = par_u
        prod[dst][nbr_u] = prod[src][par_u] * wts_u
        frontier = nbr_u
        depth_reached = d
    return level[0], level[1], parent[0], parent[1], prod[0], prod[1], depth_reached


if NUMBA_AVAILABLE:

    @njit(cache=True)
    def _bfs_jit(indptr_l, indices_l, weights_l, indptr_r, indices_r, weights_r,
                 root, max_depth, n_left, n_right):
        level_l = np.full(n_left, -1, dtype=np.int64)
        level_r = np.full(n_right, -1, dtype=np.int64)
        parent_l = np.full(n_left, -1, dtype=np.int64)
        parent_r = np.full(n_right, -1, dtype=np.int64)
        prod_l = np.zeros(n_left)
        prod_r = np.zeros(n_right)

        level_l[root] = 0
        prod_l[root] = 1.0
        frontier = np.empty(max(n_left, n_right), dtype=np.int64)
        frontier[0] = root
        f_size = 1
        nxt = np.empty(max(n_left, n_right), dtype=np.int64)
        depth_reached = 0
        for d in range(1, max_depth + 1):
            src = (d - 1) % 2
            n_size = 0
            for fi in range(f_size):
                u = frontier[fi]
                if src == 0:
                    lo, hi = indptr_l[u], indptr_l[u + 1]
                else:
                    lo, hi = indptr_r[u], indptr_r[u + 1]
                for jj in range(lo, hi):
                    if src == 0:
                        v = indices_l[jj]
                        if level_r[v] == -1:
                            level_r[v] = d
                            parent_r[v] = u
                            prod_r[v] = prod_l[u] * weights_l[jj]
                            nxt[n_size] = v
                            n_size += 1
                    else:
                        v = indices_r[jj]
                        if level_l[v] == -1:
                            level_l[v] = d
                            parent_l[v] = u
                            prod_l[v] = prod_r[u] * weights_r[jj]
                            nxt[n_size] = v
                            n_size += 1
            if n_size == 0:
                break
            # next frontier must be ascending for the smallest-parent rule
            frontier[:n_size] = np.sort(nxt[:n_size])
            f_size = n_size
            depth_reached = d
        return level_l, level_r, parent_l, parent_r, prod_l, prod_r, depth_reached

    def bfs_nb(indptr_l, indices_l, weights_l, indptr_r, indices_r, weights_r,
               root, max_depth, n_left, n_right):
        return _bfs_jit(indptr_l, indices_l, weights_l, indptr_r, indices_r,
                        weights_r, root, max_depth, n_left, n_right)

    bfs = bfs_nb
else:
    bfs_nb = None
    bfs = bfs_np


# ---------------------------------------------------------------------------
# Nearest-neighbor box scatter (3-order fast path plus a generic version).
#
# For each observed entry, its value is added to every output cell whose
# per-mode coordinates are kernel neighbors of the entry's coordinates.
# Neighbor sets are passed in CSR form (one list per coordinate value).
# ---------------------------------------------------------------------------

def nn_scatter_np(num, den, idx, vals, nbr_ptrs, nbr_inds):
    t = idx.shape[1]
    for e in range(vals.shape[0]):
        boxes = []
        for ell in range(t):
            c = idx[e, ell]
            boxes.append(nbr_inds[ell][nbr_ptrs[ell][c]:nbr_ptrs[ell][c + 1]])
        grid = np.ix_(*boxes)
        num[grid] += vals[e]
        den[grid] += 1


if NUMBA_AVAILABLE:

    @njit(cache=True)
    def _nn_scatter3_jit(num, den, i1, i2, i3, vals,
                         ptr1, ind1, ptr2, ind2, ptr3, ind3):
        for e in range(vals.shape[0]):
            v = vals[e]
            a0, a1 = ptr1[i1[e]], ptr1[i1[e] + 1]
            b0, b1 = ptr2[i2[e]], ptr2[i2[e] + 1]
            c0, c1 = ptr3[i3[e]], ptr3[i3[e] + 1]
            for ai in range(a0, a1):
                a = ind1[ai]
                for bi in range(b0, b1):
                    b = ind2[bi]
                    for ci in range(c0, c1):
                        c = ind3[ci]
                        num[a, b, c] += v
                        den[a, b, c] += 1

    def nn_scatter_nb(num, den, idx, vals, nbr_ptrs, nbr_inds):
        if idx.shape[1] != 3:
            nn_scatter_np(num, den, idx, vals, nbr_ptrs, nbr_inds)
            return
        _nn_scatter3_jit(num, den,
                         np.ascontiguousarray(idx[:, 0]),
                         np.ascontiguousarray(idx[:, 1]),
                         np.ascontiguousarray(idx[:, 2]),
                         vals,
                         nbr_ptrs[0], nbr_inds[0],
                         nbr_ptrs[1], nbr_inds[1],
                         nbr_ptrs[2], nbr_inds[2])

    nn_scatter = nn_scatter_nb
else:
    nn_scatter_nb = None
    nn_scatter = nn_scatter_np


# ---------------------------------------------------------------------------
# One-sided Jacobi SVD sweeps. The driver in sitc.oracle handles transposes,
# ordering, and sign conventions; the kernels only orthogonalize columns of G
# while accumulating the right rotations into V.
# ---------------------------------------------------------------------------

_JACOBI_TOL = 1e-14
_JACOBI_MAX_SWEEPS = 60


def jacobi_sweeps_np(G, V):
    m, n = G.shape
    for _ in range(_JACOBI_MAX_SWEEPS):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                gi = G[:, i]
                gj = G[:, j]
                alpha = float(gi @ gi)
                beta = float(gj @ gj)
                gamma = float(gi @ gj)
                if gamma == 0.0 or abs(gamma) <= _JACOBI_TOL * math.sqrt(alpha * beta):
                    continue
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                new_i = c * gi - s * gj
                new_j = s * gi + c * gj
                G[:, i] = new_i
                G[:, j] = new_j
                vi = V[:, i].copy()
                vj = V[:, j].copy()
                V[:, i] = c * vi - s * vj
                V[:, j] = s * vi + c * vj
                rotated = True
        if not rotated:
            break


if NUMBA_AVAILABLE:

    @njit(cache=True)
    def _jacobi_sweeps_jit(G, V):
        m, n = G.shape
        for _sweep in range(_JACOBI_MAX_SWEEPS):
            rotated = False
            for i in range(n - 1):
                for j in range(i + 1, n):
                    alpha = 0.0
                    beta = 0.0
                    gamma = 0.0
                    for k in range(m):
                        gi = G[k, i]
                        gj = G[k, j]
                        alpha += gi * gi
                        beta += gj * gj
                        gamma += gi * gj
                    if gamma == 0.0 or abs(gamma) <= _JACOBI_TOL * math.sqrt(alpha * beta):
                        continue
                    zeta = (beta - alpha) / (2.0 * gamma)
                    if zeta >= 0.0:
                        t = 1.0 / (zeta + math.sqrt(1.0 + zeta * zeta))
                    else:
                        t = -1.0 / (-zeta + math.sqrt(1.0 + zeta * zeta))
                    c = 1.0 / math.sqrt(1.0 + t * t)
                    s = c * t
                    for k in range(m):
                        gi = G[k, i]
                        gj = G[k, j]
                        G[k, i] = c * gi - s * gj
                        G[k, j] = s * gi + c * gj
                    for k in range(V.shape[0]):
                        vi = V[k, i]
                        vj = V[k, j]
                        V[k, i] = c * vi - s * vj
                        V[k, j] = s * vi + c * vj
                    rotated = True
            if not rotated:
                break

    def jacobi_sweeps_nb(G, V):
        _jacobi_sweeps_jit(G, V)

    jacobi_sweeps = jacobi_sweeps_nb
else:
    jacobi_sweeps_nb = None
    jacobi_sweeps = jacobi_sweeps_np
