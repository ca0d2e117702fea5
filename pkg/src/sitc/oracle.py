"""Exact brute-force reference computations.

Nothing here is meant to scale: these are the independent oracles the test
suite and acceptance criteria check the pipeline against, written as plainly
as possible. The SVD is a self-contained one-sided Jacobi so the oracle path
carries no external numerical dependency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .collapse import CollapsedMatrix, empirical_density
from .distance import BfsForest, neighborhood_vector
from .estimator import Estimate, EstimatorConfig, infer_kappa, resolve_etas
from .model import SparseObservations, TuckerModel, WeightVectors, dense_tensor

__all__ = [
    "jacobi_svd",
    "LambdaHat",
    "exact_hat_lambda",
    "exact_expected_collapse",
    "exact_latent_distance",
    "exact_latent_distance_matrix",
    "exact_pair_statistic",
    "brute_force_nn",
    "usvt_baseline",
]

_JACOBI_GUARD = 500
_BRUTE_GUARD = 10_000
_DIRECT_GUARD = 1_000_000


def jacobi_svd(A: np.ndarray):
    """One-sided Jacobi SVD of a dense matrix, size-guarded to 500.

    Returns (U, sigma, Vt) with sigma descending and signs canonicalized so
    the largest-magnitude entry of each left vector is positive.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("need a 2-d array")
    if max(A.shape) > _JACOBI_GUARD:
        raise ValueError(f"matrix side {max(A.shape)} exceeds the Jacobi guard {_JACOBI_GUARD}")
    transposed = A.shape[0] < A.shape[1]
    G = (A.T if transposed else A).copy()
    m, n = G.shape
    V = np.eye(n)
    _kernels.jacobi_sweeps(G, V)
    sigma = np.sqrt((G * G).sum(axis=0))
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    G = G[:, order]
    V = V[:, order]
    U = np.zeros((m, n))
    tiny = sigma[0] * 1e-300 if sigma.size and sigma[0] > 0 else 0.0
    for k in range(n):
        if sigma[k] > tiny and sigma[k] > 0.0:
            U[:, k] = G[:, k] / sigma[k]
    # sign convention: dominant entry of each left vector positive
    for k in range(n):
        col = U[:, k]
        if col.any():
            pivot = int(np.argmax(np.abs(col)))
            if col[pivot] < 0.0:
                U[:, k] = -col
                V[:, k] = -V[:, k]
    if transposed:
        return V, sigma, U.T
    return U, sigma, V.T


@dataclass(frozen=True, eq=False)
class LambdaHat:
    """The r x r coupling matrix of a mode pair after weight-averaging the
    remaining modes, with its SVD. Its conditioning measures whether the
    side information carries enough signal for distance estimation."""

    y: int
    z: int
    matrix: np.ndarray
    sigma: np.ndarray
    U: np.ndarray
    V: np.ndarray
    condition_number: float


def exact_hat_lambda(model: TuckerModel, weights: WeightVectors,
                     y: int, z: int) -> LambdaHat:
    """Contract the core with the realized per-mode factor-weight means
    (1/n) Q_l^T W_l over every mode except (y, z)."""
    t = model.order
    if y == z or not (0 <= y < t and 0 <= z < t):
        raise ValueError("need two distinct modes in range")
    g = [model.factor_matrices[ell].T @ weights.vectors[ell] / model.shape.dims[ell]
         for ell in range(t)]
    H = np.moveaxis(model.core, (y, z), (0, 1))
    for ell in reversed(model.shape.other_modes(y, z)):
        H = np.tensordot(H, g[ell], axes=(H.ndim - 1, 0))
    U, sigma, Vt = jacobi_svd(H)
    cond = float("inf") if sigma[-1] == 0.0 else float(sigma[0] / sigma[-1])
    return LambdaHat(y=y, z=z, matrix=H, sigma=sigma, U=U, V=Vt.T,
                     condition_number=cond)


def exact_expected_collapse(model: TuckerModel, weights: WeightVectors,
                            y: int, z: int) -> np.ndarray:
    """Expected collapsed matrix: (1/m) sum over the slab of T(i) times the
    weight product.

    Computed two ways when the instance is small enough: a literal dense
    contraction, and the factored form Q_y LambdaHat Q_z^T. Both must agree
    to 1e-10, which cross-validates the factored derivation end to end.
    """
    lam = exact_hat_lambda(model, weights, y, z)
    factored = model.factor_matrices[y] @ lam.matrix @ model.factor_matrices[z].T
    if model.shape.n_entries > _DIRECT_GUARD:
        return factored
    T = dense_tensor(model)
    # contracting in descending mode order keeps remaining axes in place
    for ell in reversed(model.shape.other_modes(y, z)):
        T = np.tensordot(T, weights.vectors[ell], axes=(ell, 0))
    direct = (T if y < z else T.T) / model.shape.mode_product(y, z)
    if np.abs(direct - factored).max(initial=0.0) > 1e-10:
        raise RuntimeError("direct and factored expected-collapse forms disagree")
    return direct


def exact_latent_distance(model: TuckerModel, lam: LambdaHat, y: int,
                          s: int, a: int, b: int) -> float:
    """|| diag(sigma)^{s+1} Qt_y^T (e_a - e_b) ||^2 with Qt_y = Q_y U."""
    Qt = model.factor_matrices[y] @ lam.U
    d = (Qt[a] - Qt[b]) * lam.sigma ** (s + 1)
    return float(d @ d)


def exact_latent_distance_matrix(model: TuckerModel, lam: LambdaHat,
                                 y: int, s: int) -> np.ndarray:
    """All-pairs version of :func:`exact_latent_distance`."""
    Z = (model.factor_matrices[y] @ lam.U) * lam.sigma ** (s + 1)
    diff = Z[:, None, :] - Z[None, :, :]
    return np.einsum("abk,abk->ab", diff, diff)


def exact_pair_statistic(model: TuckerModel, lam: LambdaHat,
                         fa: BfsForest, fb: BfsForest,
                         y: int, z: int, s: int) -> float:
    """Noiseless expectation of the pair statistic: the realized level
    vectors pushed through the factored coupling, respecting the side swap
    at odd depth."""
    na = neighborhood_vector(fa, s)
    nb = neighborhood_vector(fb, s + 1)
    Qty = model.factor_matrices[y] @ lam.U
    Qtz = model.factor_matrices[z] @ lam.V
    if s % 2 == 0:
        return float((na @ Qty) @ (lam.sigma * (nb @ Qtz)))
    return float((na @ Qtz) @ (lam.sigma * (nb @ Qty)))


def brute_force_nn(obs3: SparseObservations, distances,
                   config: EstimatorConfig, kappa: float | None = None) -> Estimate:
    """Literal double loop over (output entries x observations).

    No neighbor-list precomputation, scalar accumulation in observation
    order; the contract is identical to ``estimator.estimate`` and the two
    must agree bit for bit on any instance below the size guard.
    """
    shape = obs3.shape
    if shape.n_entries > _BRUTE_GUARD:
        raise ValueError(f"instance has {shape.n_entries} entries, brute-force guard is {_BRUTE_GUARD}")
    t = shape.order
    if kappa is None and config.eta_rule == "paper":
        kappa = infer_kappa(obs3.density, max(shape.dims), t)
    etas = resolve_etas(config, list(distances), t, kappa)
    if obs3.n_obs == 0 and config.fallback == "global_mean":
        raise ValueError("empty third split leaves no global mean to fall back on")

    dvals = [dm.values for dm in distances]
    dvalid = [dm.valid_mask for dm in distances]
    idx = obs3.indices
    vals = obs3.values
    values = np.full(shape.dims, np.nan)
    counts = np.zeros(shape.dims, dtype=np.int64)
    fallback = np.zeros(shape.dims, dtype=bool)
    for out_idx in np.ndindex(*shape.dims):
        acc = 0.0
        cnt = 0
        for e in range(vals.shape[0]):
            hit = True
            for ell in range(t):
                a = out_idx[ell]
                b = idx[e, ell]
                if not dvalid[ell][a, b]:
                    hit = False
                    break
                if not dvals[ell][a, b] <= etas[ell]:
                    hit = False
                    break
            if hit:
                acc += vals[e]
                cnt += 1
        if cnt > 0:
            values[out_idx] = acc / cnt
            counts[out_idx] = cnt
        else:
            fallback[out_idx] = True
    if config.fallback == "global_mean" and fallback.any():
        mean = 0.0
        for v in vals:
            mean += float(v)
        mean /= vals.shape[0]
        values[fallback] = mean
    return Estimate(values=values, support_counts=counts,
                    fallback_mask=fallback, etas=etas)


def usvt_baseline(m: CollapsedMatrix, threshold_mult: float = 2.02) -> np.ndarray:
    """Singular value thresholding on the collapsed matrix.

    Fill unobserved cells with 0, divide by the empirical density, drop
    singular values below threshold_mult * sqrt(n * density), rebuild and
    clip to [-1, 1]. The default multiplier is the standard choice for
    bounded entries.
    """
    n = max(m.n_y, m.n_z)
    if n > _JACOBI_GUARD:
        raise ValueError(f"matrix side {n} exceeds the USVT guard {_JACOBI_GUARD}")
    dens = empirical_density(m)
    if dens == 0.0:
        return np.zeros_like(m.values)
    X = np.where(m.observed_mask, m.values, 0.0) / dens
    U, sigma, Vt = jacobi_svd(X)
    keep = sigma >= threshold_mult * np.sqrt(n * dens)
    recon = (U[:, keep] * sigma[keep]) @ Vt[keep]
    return np.clip(recon, -1.0, 1.0)
