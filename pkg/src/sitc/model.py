"""Low-rank latent-variable tensor models and synthetic data generation.

A ground-truth tensor is described by a core array and per-mode factor
matrices obtained by evaluating a family of bounded orthonormal functions
at i.i.d. uniform latent variables. Observations are Bernoulli(p) samples
of the entries with bounded mean-zero noise. Everything is reproducible
from a single integer seed, which is deterministically split per purpose
(latents, sampling, noise, splitting, weights).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Shape",
    "TuckerModel",
    "SparseObservations",
    "WeightVectors",
    "derive_rng",
    "make_family",
    "build_orthogonal_cp_model",
    "build_general_tucker_model",
    "evaluate_entry",
    "dense_tensor",
    "sample_observations",
    "split_samples",
    "make_weight_vectors",
    "make_xor_hard_instance",
]

# Purpose tags for seed derivation. Fixed forever: changing them changes
# every generated dataset.
_K_LATENT = 1
_K_SAMPLE = 2
_K_NOISE = 3
_K_SPLIT = 4
_K_WEIGHTS = 5
_K_CORE = 6
_K_THETA = 7

_DENSE_GUARD = 1 << 21  # max entry count for dense evaluation of sup|f|


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    """A generator for (seed, purpose key), independent across purposes."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


@dataclass(frozen=True)
class Shape:
    """Order and per-mode dimensions of a tensor.

    Order-2 inputs are rejected: the collapse pipeline needs at least one
    mode to average out, so everything here starts at order 3.
    """

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) < 3:
            raise ValueError(f"tensor order must be >= 3, got {len(dims)}")
        if any(d < 2 for d in dims):
            raise ValueError(f"every dimension must be >= 2, got {dims}")

    @property
    def order(self) -> int:
        return len(self.dims)

    @property
    def n_entries(self) -> int:
        return int(np.prod([*self.dims], dtype=object))

    def other_modes(self, y: int, z: int) -> tuple[int, ...]:
        return tuple(ell for ell in range(self.order) if ell not in (y, z))

    def mode_product(self, y: int, z: int) -> int:
        """Number of underlying entries behind one collapsed cell."""
        out = 1
        for ell in self.other_modes(y, z):
            out *= self.dims[ell]
        return out


# ---------------------------------------------------------------------------
# Factor families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FactorFamily:
    """r bounded functions on [0,1], orthonormal under the uniform measure."""

    name: str
    r: int
    evaluate: Callable[[int, np.ndarray], np.ndarray] = field(compare=False)
    sup: tuple[float, ...]  # per-function sup-norm bound

    @property
    def bound(self) -> float:
        return max(self.sup)


def _householder_mix(r: int, mean_level: float) -> np.ndarray:
    """Orthonormal columns in R^{r+1} whose first coordinates all equal
    ``mean_level``. Used to give every cosine-built factor the same nonzero
    mean while keeping exact orthonormality."""
    if not 0.0 < mean_level < 1.0 / math.sqrt(r):
        raise ValueError(
            f"mean_level must lie in (0, 1/sqrt(r)) = (0, {1.0 / math.sqrt(r):.4f}), got {mean_level}"
        )
    gamma = math.sqrt(1.0 - r * mean_level**2)
    w = np.zeros(r + 1)
    w[0] = 1.0 - gamma
    w[1:] = -mean_level
    denom = w @ w
    H = np.eye(r + 1) - 2.0 * np.outer(w, w) / denom
    return H[:, 1:]


def make_family(name: str, r: int, mean_level: float | None = None) -> FactorFamily:
    """Construct a built-in orthonormal factor family.

    ``constant``          q(x) = 1, rank-1 only.
    ``cosine``            orthonormal combinations of {1, sqrt(2) cos(k pi x)}
                          whose means all equal ``mean_level`` (default
                          0.9/sqrt(r)); the bounded-means regime.
    ``cosine_zero_mean``  q_k(x) = sqrt(2) cos(k pi x); every mean is zero.
    ``rademacher``        q_k(x) = sign(sin(2^k pi x)); +/-1 valued, zero mean.
    """
    if r < 1:
        raise ValueError(f"rank must be >= 1, got {r}")
    if name == "constant":
        if r != 1:
            raise ValueError("constant family is only orthonormal at rank 1")

        def ev_const(k, x):
            return np.ones_like(np.asarray(x, dtype=float))

        return FactorFamily("constant", 1, ev_const, (1.0,))

    if name == "cosine":
        mu = 0.9 / math.sqrt(r) if mean_level is None else float(mean_level)
        G = _householder_mix(r, mu)

        def ev_cos(k, x, _G=G):
            x = np.asarray(x, dtype=float)
            out = np.full(x.shape, _G[0, k])
            for j in range(1, _G.shape[0]):
                out = out + _G[j, k] * math.sqrt(2.0) * np.cos(j * math.pi * x)
            return out

        sup = tuple(abs(G[0, k]) + math.sqrt(2.0) * np.abs(G[1:, k]).sum() for k in range(r))
        return FactorFamily("cosine", r, ev_cos, sup)

    if name == "cosine_zero_mean":

        def ev_czm(k, x):
            x = np.asarray(x, dtype=float)
            return math.sqrt(2.0) * np.cos((k + 1) * math.pi * x)

        return FactorFamily("cosine_zero_mean", r, ev_czm, (math.sqrt(2.0),) * r)

    if name == "rademacher":

        def ev_rad(k, x):
            x = np.asarray(x, dtype=float)
            s = np.sin((2 ** (k + 1)) * math.pi * x)
            return np.where(s >= 0.0, 1.0, -1.0)

        return FactorFamily("rademacher", r, ev_rad, (1.0,) * r)

    raise ValueError(f"unknown factor family {name!r}")


# ---------------------------------------------------------------------------
# Model type
# ---------------------------------------------------------------------------

def _superdiag_core(t: int, lambdas: np.ndarray) -> np.ndarray:
    r = lambdas.shape[0]
    core = np.zeros((r,) * t)
    core[tuple(np.arange(r) for _ in range(t))] = lambdas
    return core


def _core_value_bound(core: np.ndarray, factors: Sequence[np.ndarray]) -> float:
    """Upper bound on sup|f| from |core| and realized per-column factor maxima."""
    col_max = [np.abs(Q).max(axis=0) for Q in factors]
    bound = 0.0
    for k in np.ndindex(core.shape):
        lam = core[k]
        if lam == 0.0:
            continue
        term = abs(lam)
        for ell, kk in enumerate(k):
            term *= col_max[ell][kk]
        bound += term
    return float(bound)


@dataclass(frozen=True)
class TuckerModel:
    """Ground-truth generator: core array, latent variables, factor matrices.

    ``factor_kind`` is ``"orthogonal_cp"`` (superdiagonal core, enforced) or
    ``"general_tucker"``. ``value_bound`` is a guaranteed bound on sup|f|
    and must not exceed 1 so observations stay in [-1, 1].
    """

    shape: Shape
    rank: int
    core: np.ndarray
    latent_vars: tuple[np.ndarray, ...]
    factor_kind: str
    factor_matrices: tuple[np.ndarray, ...]
    factor_bound: float
    value_bound: float
    family: str = "custom"

    def __post_init__(self):
        t = self.shape.order
        if self.core.shape != (self.rank,) * t:
            raise ValueError(f"core shape {self.core.shape} != {(self.rank,) * t}")
        if len(self.factor_matrices) != t or len(self.latent_vars) != t:
            raise ValueError("need one factor matrix and one latent vector per mode")
        for ell in range(t):
            n = self.shape.dims[ell]
            if self.factor_matrices[ell].shape != (n, self.rank):
                raise ValueError(f"factor matrix {ell} has shape "
                                 f"{self.factor_matrices[ell].shape}, expected ({n}, {self.rank})")
            if self.latent_vars[ell].shape != (n,):
                raise ValueError(f"latent vector {ell} has wrong length")
            x = self.latent_vars[ell]
            if np.any(x < 0.0) or np.any(x > 1.0):
                raise ValueError("latent variables must lie in [0, 1]")
            if np.abs(self.factor_matrices[ell]).max(initial=0.0) > self.factor_bound + 1e-9:
                raise ValueError("factor values exceed the declared bound")
        if self.factor_kind == "orthogonal_cp":
            # exhaustive scan: off-superdiagonal core entries must vanish
            for k in np.ndindex(self.core.shape):
                if len(set(k)) > 1 and self.core[k] != 0.0:
                    raise ValueError(f"orthogonal CP core has off-superdiagonal entry at {k}")
        elif self.factor_kind != "general_tucker":
            raise ValueError(f"unknown factor_kind {self.factor_kind!r}")
        if self.value_bound > 1.0 + 1e-9:
            raise ValueError(f"value_bound {self.value_bound} exceeds 1")
        check = _core_value_bound(self.core, self.factor_matrices)
        if self.shape.n_entries <= _DENSE_GUARD:
            check = min(check, float(np.abs(dense_tensor(self)).max(initial=0.0)))
        if check > self.value_bound + 1e-9:
            raise ValueError("declared value_bound is smaller than a realized bound")

    @property
    def order(self) -> int:
        return self.shape.order

    @property
    def lambdas(self) -> np.ndarray:
        """Superdiagonal of the core."""
        return self.core[tuple(np.arange(self.rank) for _ in range(self.order))].copy()


def evaluate_entry(model: TuckerModel, i: Sequence[int]) -> float:
    """Tensor value at one index vector: sum_k core(k) prod_ell Q_ell(i_ell, k_ell)."""
    idx = np.asarray(i, dtype=np.int64)
    if idx.shape != (model.order,):
        raise ValueError(f"index vector must have length {model.order}")
    for ell in range(model.order):
        if not 0 <= idx[ell] < model.shape.dims[ell]:
            raise IndexError(f"index {idx[ell]} out of range for mode {ell}")
    return float(_evaluate_batch(model, idx[None, :])[0])


def _evaluate_batch(model: TuckerModel, idx: np.ndarray) -> np.ndarray:
    """Values at a batch of index vectors, shape (B, t) -> (B,)."""
    acc = np.broadcast_to(model.core, (idx.shape[0],) + model.core.shape).copy()
    for ell in range(model.order):
        rows = model.factor_matrices[ell][idx[:, ell]]  # (B, r)
        acc = np.einsum("bk...,bk->b...", acc, rows)
    return acc


def dense_tensor(model: TuckerModel) -> np.ndarray:
    """Full dense tensor via successive mode products."""
    T = model.core
    for ell in range(model.order):
        T = np.tensordot(T, model.factor_matrices[ell], axes=([0], [1]))
    return T


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def build_orthogonal_cp_model(shape, r: int, lambdas: Sequence[float],
                              factor_family: str = "cosine", seed: int = 0,
                              noise_headroom: float = 0.0,
                              mean_level: float | None = None) -> TuckerModel:
    """Orthogonal CP model with i.i.d. uniform latents.

    The core is rescaled so sup|f| <= 1 - noise_headroom, leaving room for
    additive noise of that amplitude without leaving [-1, 1].
    """
    shape = shape if isinstance(shape, Shape) else Shape(tuple(shape))
    if r < 1:
        raise ValueError("rank must be >= 1")
    if r > min(shape.dims):
        raise ValueError(f"rank {r} exceeds the smallest dimension {min(shape.dims)}")
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.shape != (r,):
        raise ValueError(f"need exactly {r} core weights, got {lambdas.shape}")
    if not 0.0 <= noise_headroom < 1.0:
        raise ValueError("noise_headroom must lie in [0, 1)")
    fam = make_family(factor_family, r, mean_level=mean_level)
    rng = derive_rng(seed, _K_LATENT)
    latents = tuple(rng.random(n) for n in shape.dims)
    factors = tuple(
        np.column_stack([fam.evaluate(k, x) for k in range(r)]) for x in latents
    )
    sup_f = sum(abs(lam) * np.prod([fam.sup[k]] * shape.order) for k, lam in enumerate(lambdas))
    scale = (1.0 - noise_headroom) / sup_f if sup_f > 0.0 else 1.0
    core = _superdiag_core(shape.order, lambdas * scale)
    return TuckerModel(
        shape=shape, rank=r, core=core, latent_vars=latents,
        factor_kind="orthogonal_cp", factor_matrices=factors,
        factor_bound=fam.bound, value_bound=(1.0 - noise_headroom) if sup_f > 0 else 0.0,
        family=factor_family,
    )


def build_general_tucker_model(shape, r: int, seed: int = 0,
                               factor_family: str = "cosine",
                               offdiag_scale: float = 0.5,
                               noise_headroom: float = 0.0,
                               mean_level: float | None = None) -> TuckerModel:
    """Tucker model whose core is not superdiagonal: unit superdiagonal plus
    uniform off-superdiagonal entries scaled by ``offdiag_scale``."""
    shape = shape if isinstance(shape, Shape) else Shape(tuple(shape))
    if r < 1 or r > min(shape.dims):
        raise ValueError("rank must lie in [1, min(dims)]")
    fam = make_family(factor_family, r, mean_level=mean_level)
    rng_core = derive_rng(seed, _K_CORE)
    core = rng_core.uniform(-1.0, 1.0, size=(r,) * shape.order) * offdiag_scale
    core[tuple(np.arange(r) for _ in range(shape.order))] = 1.0
    rng = derive_rng(seed, _K_LATENT)
    latents = tuple(rng.random(n) for n in shape.dims)
    factors = tuple(
        np.column_stack([fam.evaluate(k, x) for k in range(r)]) for x in latents
    )
    sup_f = 0.0
    for k in np.ndindex(core.shape):
        term = abs(core[k])
        for ell, kk in enumerate(k):
            term *= fam.sup[kk]
        sup_f += term
    scale = (1.0 - noise_headroom) / sup_f if sup_f > 0.0 else 1.0
    return TuckerModel(
        shape=shape, rank=r, core=core * scale, latent_vars=latents,
        factor_kind="general_tucker", factor_matrices=factors,
        factor_bound=fam.bound, value_bound=(1.0 - noise_headroom) if sup_f > 0 else 0.0,
        family=factor_family,
    )


# ---------------------------------------------------------------------------
# Observations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SparseObservations:
    """Coordinate-list observations, lexicographically sorted and duplicate
    free. ``density`` is the (effective) Bernoulli rate behind this set."""

    shape: Shape
    indices: np.ndarray  # (N, t) int64, lex sorted
    values: np.ndarray   # (N,) float64
    density: float
    seed: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1, self.shape.order)
        vals = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if idx.shape[0] != vals.shape[0]:
            raise ValueError("indices and values disagree in length")
        if idx.size:
            if idx.min() < 0 or np.any(idx >= np.asarray(self.shape.dims)):
                raise ValueError("index vector out of range for shape")
            order = np.lexsort(idx.T[::-1])
            idx = idx[order]
            vals = vals[order]
            dup = np.all(idx[1:] == idx[:-1], axis=1)
            if dup.any():
                raise ValueError("duplicate index vectors in observation set")
        if vals.size and np.abs(vals).max() > 1.0 + 1e-12:
            raise ValueError("observed values must lie in [-1, 1]")
        if not 0.0 < self.density <= 1.0:
            raise ValueError("density must lie in (0, 1]")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)

    @property
    def n_obs(self) -> int:
        return self.indices.shape[0]

    @classmethod
    def from_entries(cls, shape: Shape, entries, density: float, seed: int = 0):
        """Ingest (index vector, value) pairs; duplicates keep the first
        occurrence, with a warning."""
        if len(entries) == 0:
            return cls(shape, np.empty((0, shape.order), dtype=np.int64),
                       np.empty(0), density, seed)
        idx = np.asarray([e[0] for e in entries], dtype=np.int64)
        vals = np.asarray([e[1] for e in entries], dtype=np.float64)
        # stable lexsort over index columns, keeping input order on ties
        order = np.lexsort(idx.T[::-1])
        idx, vals = idx[order], vals[order]
        keep = np.ones(len(vals), dtype=bool)
        keep[1:] = ~np.all(idx[1:] == idx[:-1], axis=1)
        if not keep.all():
            warnings.warn(f"dropping {int((~keep).sum())} duplicate entries, keeping first seen")
        return cls(shape, idx[keep], vals[keep], density, seed)


def _sample_flat_indices(rng: np.random.Generator, n_total: int, p: float) -> np.ndarray:
    """Flat indices of a Bernoulli(p) subset, sorted ascending.

    Below the guard a direct per-index draw is used. Above it, the count is
    drawn Binomial(n_total, p) and a uniform subset of that size is picked,
    which has the same law without materializing n_total draws.
    """
    if n_total <= _DENSE_GUARD:
        return np.flatnonzero(rng.random(n_total) < p)
    count = int(rng.binomial(n_total, p))
    if count == 0:
        return np.empty(0, dtype=np.int64)
    pool = np.empty(0, dtype=np.int64)
    while pool.size < count:
        extra = rng.integers(0, n_total, size=int(count * 1.2) + 16)
        pool = np.unique(np.concatenate([pool, extra]))
    chosen = rng.choice(pool, size=count, replace=False)
    chosen.sort()
    return chosen


def sample_observations(model: TuckerModel, p: float, noise_amplitude: float = 0.0,
                        seed: int = 0) -> SparseObservations:
    """Bernoulli(p) entry sampling with uniform noise on [-amp, +amp].

    Requires the model to carry enough headroom: value_bound + amp <= 1.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"sampling density must lie in (0, 1], got {p}")
    if not 0.0 <= noise_amplitude < 1.0:
        raise ValueError("noise_amplitude must lie in [0, 1)")
    if model.value_bound + noise_amplitude > 1.0 + 1e-9:
        raise ValueError(
            f"model value bound {model.value_bound:.4f} leaves no room for "
            f"noise amplitude {noise_amplitude:.4f}; rebuild with noise_headroom"
        )
    rng = derive_rng(seed, _K_SAMPLE)
    flat = _sample_flat_indices(rng, model.shape.n_entries, p)
    idx = np.column_stack(np.unravel_index(flat, model.shape.dims)).astype(np.int64)
    vals = _evaluate_batch(model, idx) if idx.size else np.empty(0)
    if noise_amplitude > 0.0 and idx.size:
        noise_rng = derive_rng(seed, _K_NOISE)
        vals = vals + noise_rng.uniform(-noise_amplitude, noise_amplitude, size=vals.shape)
    return SparseObservations(model.shape, idx, vals, density=p, seed=seed)


def split_samples(obs: SparseObservations, seed: int = 0):
    """Assign each entry uniformly to one of three disjoint parts.

    The parts partition the observation set exactly; each carries effective
    density p/3, which downstream statistics use wherever p appears.
    """
    rng = derive_rng(seed, _K_SPLIT)
    assign = rng.integers(0, 3, size=obs.n_obs)
    parts = []
    for part in range(3):
        sel = assign == part
        parts.append(SparseObservations(
            obs.shape, obs.indices[sel], obs.values[sel],
            density=obs.density / 3.0, seed=seed,
        ))
    return tuple(parts)


# ---------------------------------------------------------------------------
# Side-information weight vectors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightVectors:
    """Per-mode weight vectors in [-1, 1] plus the realized inner products
    (1/n) <Q_ell(., k), W_ell>, which tell whether the side information
    actually carries signal for each factor."""

    vectors: tuple[np.ndarray, ...]
    kind: str
    factor_means: tuple[np.ndarray, ...]

    def __post_init__(self):
        for w in self.vectors:
            if np.abs(w).max(initial=0.0) > 1.0 + 1e-12:
                raise ValueError("weight vectors must lie in [-1, 1]")


def make_weight_vectors(model: TuckerModel, kind: str, seed: int = 0,
                        coefficients: Sequence[float] | None = None,
                        vectors: Sequence[np.ndarray] | None = None) -> WeightVectors:
    """Build side-information weights.

    ``uniform``             all-ones per mode.
    ``latent_combination``  W_ell = sum_k mu_k Q_ell(., k), rescaled to
                            sup-norm <= 1; mu defaults to U[0.5, 1] draws.
    ``custom``              caller-provided vectors, validated.
    """
    t = model.order
    if kind == "uniform":
        ws = tuple(np.ones(n) for n in model.shape.dims)
    elif kind == "latent_combination":
        rng = derive_rng(seed, _K_WEIGHTS)
        ws = []
        for ell in range(t):
            if coefficients is None:
                mu = rng.uniform(0.5, 1.0, size=model.rank)
            else:
                mu = np.asarray(coefficients, dtype=float)
                if mu.shape != (model.rank,):
                    raise ValueError("coefficient vector must have length rank")
                if np.abs(mu).min() <= 0.0:
                    raise ValueError("combination coefficients must be bounded away from 0")
            w = model.factor_matrices[ell] @ mu
            peak = np.abs(w).max(initial=0.0)
            if peak > 1.0:
                w = w / peak
            ws.append(w)
        ws = tuple(ws)
    elif kind == "custom":
        if vectors is None or len(vectors) != t:
            raise ValueError("custom weights need one vector per mode")
        ws = []
        for ell, w in enumerate(vectors):
            w = np.asarray(w, dtype=float)
            if w.shape != (model.shape.dims[ell],):
                raise ValueError(f"custom weight vector {ell} has wrong length")
            if np.abs(w).max(initial=0.0) > 1.0 + 1e-12:
                raise ValueError("custom weight values must lie in [-1, 1]")
            ws.append(w)
        ws = tuple(ws)
    else:
        raise ValueError(f"unknown weight kind {kind!r}")
    means = tuple(
        model.factor_matrices[ell].T @ ws[ell] / model.shape.dims[ell] for ell in range(t)
    )
    return WeightVectors(ws, kind, means)


# ---------------------------------------------------------------------------
# Planted parity (3-XOR style) hard instances
# ---------------------------------------------------------------------------

def make_xor_hard_instance(n: int, bias: float = 0.0, seed: int = 0,
                           theta: np.ndarray | None = None):
    """Rank-1 symmetric +/-1 instance with parity values and flip noise.

    Returns the expected-tensor model T(i,j,k) = (7/8) theta_i theta_j theta_k
    and an observation factory: ``factory(p, seed)`` emits Bernoulli(p)
    sampled entries whose value is theta_i theta_j theta_k with probability
    7/8 and +1 or -1 with probability 1/16 each. theta entries are +1 with
    probability 1/2 + bias.
    """
    if not 0.0 <= bias <= 0.5:
        raise ValueError(f"bias must lie in [0, 0.5], got {bias}")
    shape = Shape((n, n, n))
    rng = derive_rng(seed, _K_THETA)
    x = rng.random(n)
    if theta is None:
        th = np.where(x < 0.5 + bias, 1.0, -1.0)
    else:
        th = np.asarray(theta, dtype=float)
        if th.shape != (n,) or not np.all(np.abs(th) == 1.0):
            raise ValueError("theta must be a +/-1 vector of length n")
    core = _superdiag_core(3, np.array([7.0 / 8.0]))
    Q = th[:, None]
    model = TuckerModel(
        shape=shape, rank=1, core=core, latent_vars=(x, x, x),
        factor_kind="orthogonal_cp", factor_matrices=(Q, Q, Q),
        factor_bound=1.0, value_bound=7.0 / 8.0, family="xor",
    )

    def factory(p: float, sample_seed: int) -> SparseObservations:
        if not 0.0 < p <= 1.0:
            raise ValueError(f"sampling density must lie in (0, 1], got {p}")
        s_rng = derive_rng(sample_seed, _K_SAMPLE)
        flat = _sample_flat_indices(s_rng, shape.n_entries, p)
        idx = np.column_stack(np.unravel_index(flat, shape.dims)).astype(np.int64)
        parity = th[idx[:, 0]] * th[idx[:, 1]] * th[idx[:, 2]] if idx.size else np.empty(0)
        u = derive_rng(sample_seed, _K_NOISE).random(idx.shape[0])
        vals = np.where(u < 7.0 / 8.0, parity, np.where(u < 15.0 / 16.0, 1.0, -1.0))
        return SparseObservations(shape, idx, vals, density=p, seed=sample_seed)

    return model, factory
