"""Collapse a sparse tensor onto a mode pair.

All modes except (y, z) are averaged out with the side-information weights,
producing a partially observed n_y x n_z matrix. A cell is observed exactly
when at least one tensor observation hits its index slab; unobserved cells
carry NaN, never 0, because 0 is a legal observed value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import Shape, SparseObservations, WeightVectors

__all__ = ["CollapsedMatrix", "collapse", "induced_density", "empirical_density"]


@dataclass(frozen=True, eq=False)
class CollapsedMatrix:
    """Weighted cell averages with explicit mask and underlying counts."""

    y: int
    z: int
    values: np.ndarray        # n_y x n_z, NaN where unobserved
    observed_mask: np.ndarray  # bool
    counts: np.ndarray         # int64, |Omega ∩ I_yz(a, b)|

    @property
    def n_y(self) -> int:
        return self.values.shape[0]

    @property
    def n_z(self) -> int:
        return self.values.shape[1]


def _weight_contrib(obs: SparseObservations, y: int, z: int,
                    weights: WeightVectors) -> np.ndarray:
    contrib = obs.values.copy()
    for ell in obs.shape.other_modes(y, z):
        contrib *= weights.vectors[ell][obs.indices[:, ell]]
    return contrib


def collapse(obs: SparseObservations, y: int, z: int,
             weights: WeightVectors) -> CollapsedMatrix:
    """Single streaming pass over the entries, O(|Omega| * t).

    values(a, b) = sum over hits of T_obs(i) * prod_{l not in {y,z}} W_l(i_l),
    divided by the raw hit count.
    """
    t = obs.shape.order
    if y == z:
        raise ValueError("collapse needs two distinct modes")
    if not (0 <= y < t and 0 <= z < t):
        raise ValueError(f"modes ({y}, {z}) out of range for order {t}")
    if len(weights.vectors) != t or any(
        weights.vectors[ell].shape != (obs.shape.dims[ell],) for ell in range(t)
    ):
        raise ValueError("weight vectors do not match the observation shape")
    n_y, n_z = obs.shape.dims[y], obs.shape.dims[z]
    contrib = _weight_contrib(obs, y, z, weights)
    sums, counts = _kernels.cell_sums(
        obs.indices[:, y], obs.indices[:, z], contrib, n_y, n_z
    )
    mask = counts > 0
    values = np.full((n_y, n_z), np.nan)
    values[mask] = sums[mask] / counts[mask]
    return CollapsedMatrix(y=y, z=z, values=values, observed_mask=mask, counts=counts)


def induced_density(p: float, shape: Shape, y: int, z: int) -> float:
    """Probability that a collapsed cell is observed: 1 - (1-p)^m with
    m the product of the collapsed-out dimensions. Evaluated via log1p/expm1
    so tiny p does not lose precision."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"density must lie in (0, 1], got {p}")
    m = shape.mode_product(y, z)
    if p == 1.0:
        return 1.0
    return float(-np.expm1(m * np.log1p(-p)))


def empirical_density(m: CollapsedMatrix) -> float:
    """Fraction of observed cells."""
    return float(m.observed_mask.mean())
