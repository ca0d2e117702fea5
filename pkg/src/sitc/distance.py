"""Phase 1: BFS neighborhood statistics and pairwise distance estimates.

The collapsed matrix induces a bipartite graph on [n_y] x [n_z]. From every
left vertex a BFS tree is grown; each reached vertex carries the product of
edge weights along its tree path. Normalized level vectors at depths s and
s+1, combined with a second independent observation split, give the pair
statistic D and the distance estimates

    d_y(a, b) = D(a, a) + D(b, b) - D(a, b) - D(b, a).

BFS ties are broken deterministically: frontiers expand in ascending index
order and the smallest-index parent wins, so identical inputs give identical
trees everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .collapse import CollapsedMatrix
from .model import SparseObservations, WeightVectors

__all__ = [
    "ShallowTreeError",
    "BipartiteGraph",
    "BfsForest",
    "DistanceMatrix",
    "choose_depth",
    "build_graph",
    "bfs_neighborhood",
    "neighborhood_vector",
    "pair_statistic",
    "distance_matrix",
]


class ShallowTreeError(ValueError):
    """A BFS tree did not reach the requested depth."""


def choose_depth(n: int, p: float, t: int) -> int:
    """BFS depth s = ceil(ln n / ln(p n^{t-1})), at least 1.

    With p = n^{kappa - (t-1)} this reduces to ceil(1/kappa). Requires the
    supercritical regime p n^{t-1} > 1; below it the data graph has no
    giant component and no depth makes the statistics meaningful.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    growth = p * float(n) ** (t - 1)
    if growth <= 1.0:
        raise ValueError(
            f"p * n^(t-1) = {growth:.4g} <= 1: below the connectivity regime"
        )
    ratio = math.log(n) / math.log(growth)
    return max(1, math.ceil(ratio - 1e-9))


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """CSR adjacency for both sides; edge weights are the collapsed values."""

    n_left: int
    n_right: int
    indptr_left: np.ndarray
    indices_left: np.ndarray
    weights_left: np.ndarray
    indptr_right: np.ndarray
    indices_right: np.ndarray
    weights_right: np.ndarray

    @property
    def n_edges(self) -> int:
        return self.indices_left.shape[0]

    def degree_left(self, a: int) -> int:
        return int(self.indptr_left[a + 1] - self.indptr_left[a])


def _csr_from_mask(mask: np.ndarray, values: np.ndarray):
    rows, cols = np.nonzero(mask)  # row-major, so per-row columns ascend
    indptr = np.zeros(mask.shape[0] + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=mask.shape[0]), out=indptr[1:])
    return indptr, cols.astype(np.int64), values[rows, cols]


def build_graph(m: CollapsedMatrix) -> BipartiteGraph:
    """One edge per observed cell, weight = collapsed value."""
    indptr_l, indices_l, weights_l = _csr_from_mask(m.observed_mask, m.values)
    indptr_r, indices_r, weights_r = _csr_from_mask(m.observed_mask.T, m.values.T)
    return BipartiteGraph(
        n_left=m.n_y, n_right=m.n_z,
        indptr_left=indptr_l, indices_left=indices_l, weights_left=weights_l,
        indptr_right=indptr_r, indices_right=indices_r, weights_right=weights_r,
    )


@dataclass(frozen=True, eq=False)
class BfsForest:
    """BFS tree of one root with per-vertex path products.

    Level j lives on the left side when j is even, on the right side when j
    is odd. ``levels[j]`` lists the vertices at distance j in ascending
    order; ``path_product_*`` hold the product of edge weights along the
    tree path for reached vertices (1 at the root).
    """

    root: int
    n_left: int
    n_right: int
    level_left: np.ndarray
    level_right: np.ndarray
    parent_left: np.ndarray
    parent_right: np.ndarray
    path_product_left: np.ndarray
    path_product_right: np.ndarray
    depth_reached: int

    @property
    def levels(self) -> tuple[np.ndarray, ...]:
        out = []
        for j in range(self.depth_reached + 1):
            lv = self.level_left if j % 2 == 0 else self.level_right
            out.append(np.flatnonzero(lv == j).astype(np.int64))
        return tuple(out)

    def side_size(self, j: int) -> int:
        return self.n_left if j % 2 == 0 else self.n_right


def bfs_neighborhood(g: BipartiteGraph, root: int, s: int) -> BfsForest:
    """Grow the tree to depth s+1 (both level-s and level-(s+1) vectors are
    needed downstream). Falling short is not an error; it is recorded in
    ``depth_reached``."""
    if not 0 <= root < g.n_left:
        raise ValueError(f"root {root} is not a left vertex")
    res = _kernels.bfs(
        g.indptr_left, g.indices_left, g.weights_left,
        g.indptr_right, g.indices_right, g.weights_right,
        root, s + 1, g.n_left, g.n_right,
    )
    level_l, level_r, parent_l, parent_r, prod_l, prod_r, depth = res
    return BfsForest(
        root=root, n_left=g.n_left, n_right=g.n_right,
        level_left=level_l, level_right=level_r,
        parent_left=parent_l, parent_right=parent_r,
        path_product_left=prod_l, path_product_right=prod_r,
        depth_reached=int(depth),
    )


def neighborhood_vector(f: BfsForest, j: int) -> np.ndarray:
    """Normalized level vector: support is the depth-j level, value is the
    path product divided by the level size. Dense over the level's side."""
    if j > f.depth_reached:
        raise ShallowTreeError(
            f"tree rooted at {f.root} reached depth {f.depth_reached}, need {j}"
        )
    if j % 2 == 0:
        lv, prod = f.level_left, f.path_product_left
    else:
        lv, prod = f.level_right, f.path_product_right
    members = lv == j
    vec = np.zeros(f.side_size(j))
    vec[members] = prod[members] / members.sum()
    return vec


def _scatter_sums(obs: SparseObservations, y: int, z: int,
                  weights: WeightVectors) -> np.ndarray:
    """Raw per-cell weighted sums over the given split (no count division)."""
    contrib = obs.values.copy()
    for ell in obs.shape.other_modes(y, z):
        contrib *= weights.vectors[ell][obs.indices[:, ell]]
    sums, _ = _kernels.cell_sums(
        obs.indices[:, y], obs.indices[:, z], contrib,
        obs.shape.dims[y], obs.shape.dims[z],
    )
    return sums


def pair_statistic(fa: BfsForest, fb: BfsForest, obs2: SparseObservations,
                   weights: WeightVectors, y: int, z: int,
                   s: int, p: float | None = None) -> float:
    """D(a, b) from the second split.

    The level-s vector of root a is paired with the level-(s+1) vector of
    root b through the per-cell weighted sums of obs2, normalized by
    1/(p_eff * m). For even s the level-s side is the y side and cells are
    read as (i, j); for odd s the sides swap and cells are read transposed.
    """
    if fa.depth_reached < s or fb.depth_reached < s + 1:
        raise ShallowTreeError("both roots must reach depths s and s+1")
    p_eff = obs2.density if p is None else p
    m = obs2.shape.mode_product(y, z)
    na = neighborhood_vector(fa, s)
    nb = neighborhood_vector(fb, s + 1)
    A = _scatter_sums(obs2, y, z, weights)
    if s % 2 == 0:
        val = na @ A @ nb
    else:
        val = na @ A.T @ nb
    return float(val / (p_eff * m))


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric per-mode distance estimates with exact zero diagonal.

    ``values`` carries NaN wherever ``valid_mask`` is false (a root failed
    to reach depth s+1). The diagonal is always valid: d(a, a) = 0 by
    algebraic cancellation whatever the tree depths.
    """

    mode: int
    values: np.ndarray
    valid_mask: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _level_matrix(forests, j: int, side_size: int) -> tuple[np.ndarray, np.ndarray]:
    """Stack normalized level-j vectors of all roots; flag roots that are
    deep enough."""
    U = np.zeros((len(forests), side_size))
    ok = np.zeros(len(forests), dtype=bool)
    for a, f in enumerate(forests):
        if f.depth_reached >= j:
            U[a] = neighborhood_vector(f, j)
            ok[a] = True
    return U, ok


def distance_matrix(collapsed: CollapsedMatrix, obs2: SparseObservations,
                    weights: WeightVectors, s: int,
                    p: float | None = None,
                    graph: BipartiteGraph | None = None) -> DistanceMatrix:
    """Distance estimates for the collapsed pair's left mode.

    Builds the graph, grows one BFS tree per left vertex, forms the pair
    statistic for every ordered pair in one batch (stream obs2 once into a
    sparse cell-sum matrix A, then two dense products), and combines

        d(a, b) = D(a, a) + D(b, b) - D(a, b) - D(b, a).

    The expression is evaluated as (diag_a + diag_b) - (D + D^T), which is
    exactly symmetric and exactly zero on the diagonal in floating point.
    """
    y, z = collapsed.y, collapsed.z
    g = graph if graph is not None else build_graph(collapsed)
    forests = [bfs_neighborhood(g, a, s) for a in range(g.n_left)]
    side_s = g.n_left if s % 2 == 0 else g.n_right
    side_s1 = g.n_right if s % 2 == 0 else g.n_left
    U_s, ok_s = _level_matrix(forests, s, side_s)
    U_s1, ok_s1 = _level_matrix(forests, s + 1, side_s1)
    valid_root = ok_s & ok_s1

    p_eff = obs2.density if p is None else p
    m = obs2.shape.mode_product(y, z)
    A = _scatter_sums(obs2, y, z, weights)
    A_eff = A if s % 2 == 0 else A.T
    D = (U_s @ A_eff @ U_s1.T) / (p_eff * m)

    diag = np.diag(D).copy()
    values = (diag[:, None] + diag[None, :]) - (D + D.T)
    valid = valid_root[:, None] & valid_root[None, :]
    np.fill_diagonal(valid, True)
    values = np.where(valid, values, np.nan)
    np.fill_diagonal(values, 0.0)
    return DistanceMatrix(mode=y, values=values, valid_mask=valid)
