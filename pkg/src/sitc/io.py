"""Line-oriented text dumps with bit-exact round trips.

All floats are written with Python's shortest round-trip repr, so parsing a
dump reproduces the exact double. Indices are 0-based.

Formats:
  observations   header ``# shape t n_1 ... n_t p seed`` then ``i_1 ... i_t value``
  estimate       same, plus a trailing ``fallback`` flag column (0/1)
  collapsed      header ``# collapsed y z n_y n_z`` then ``a b count value``
  distances      header ``# distances mode n`` then ``a b value valid`` for a < b
"""

from __future__ import annotations

import numpy as np

from .collapse import CollapsedMatrix
from .distance import DistanceMatrix
from .estimator import Estimate
from .model import Shape, SparseObservations

__all__ = [
    "dump_observations", "load_observations",
    "dump_collapsed", "load_collapsed",
    "dump_distances", "load_distances",
    "dump_estimate", "load_estimate",
]


def _fmt(x: float) -> str:
    return repr(float(x))


def dump_observations(obs: SparseObservations) -> str:
    dims = " ".join(str(d) for d in obs.shape.dims)
    lines = [f"# shape {obs.shape.order} {dims} {_fmt(obs.density)} {obs.seed}"]
    for e in range(obs.n_obs):
        coords = " ".join(str(int(c)) for c in obs.indices[e])
        lines.append(f"{coords} {_fmt(obs.values[e])}")
    return "\n".join(lines) + "\n"


def load_observations(text: str) -> SparseObservations:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if head[0] != "#" or head[1] != "shape":
        raise ValueError("not an observation dump")
    t = int(head[2])
    dims = tuple(int(x) for x in head[3:3 + t])
    density = float(head[3 + t])
    seed = int(head[4 + t])
    idx, vals = [], []
    for ln in lines[1:]:
        parts = ln.split()
        idx.append([int(x) for x in parts[:t]])
        vals.append(float(parts[t]))
    indices = np.asarray(idx, dtype=np.int64).reshape(-1, t)
    return SparseObservations(Shape(dims), indices, np.asarray(vals), density, seed)


def dump_collapsed(m: CollapsedMatrix) -> str:
    lines = [f"# collapsed {m.y} {m.z} {m.n_y} {m.n_z}"]
    for a, b in zip(*np.nonzero(m.observed_mask)):
        lines.append(f"{a} {b} {int(m.counts[a, b])} {_fmt(m.values[a, b])}")
    return "\n".join(lines) + "\n"


def load_collapsed(text: str) -> CollapsedMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if head[:2] != ["#", "collapsed"]:
        raise ValueError("not a collapsed-matrix dump")
    y, z, n_y, n_z = (int(x) for x in head[2:6])
    values = np.full((n_y, n_z), np.nan)
    counts = np.zeros((n_y, n_z), dtype=np.int64)
    for ln in lines[1:]:
        a_s, b_s, c_s, v_s = ln.split()
        a, b = int(a_s), int(b_s)
        counts[a, b] = int(c_s)
        values[a, b] = float(v_s)
    return CollapsedMatrix(y=y, z=z, values=values,
                           observed_mask=counts > 0, counts=counts)


def dump_distances(dm: DistanceMatrix) -> str:
    n = dm.n
    lines = [f"# distances {dm.mode} {n}"]
    for a in range(n):
        for b in range(a + 1, n):
            valid = int(dm.valid_mask[a, b])
            lines.append(f"{a} {b} {_fmt(dm.values[a, b])} {valid}")
    return "\n".join(lines) + "\n"


def load_distances(text: str) -> DistanceMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if head[:2] != ["#", "distances"]:
        raise ValueError("not a distance dump")
    mode, n = int(head[2]), int(head[3])
    values = np.zeros((n, n))
    valid = np.zeros((n, n), dtype=bool)
    np.fill_diagonal(valid, True)
    for ln in lines[1:]:
        a_s, b_s, v_s, ok_s = ln.split()
        a, b = int(a_s), int(b_s)
        values[a, b] = values[b, a] = float(v_s)
        valid[a, b] = valid[b, a] = bool(int(ok_s))
    values[~valid] = np.nan
    np.fill_diagonal(values, 0.0)
    return DistanceMatrix(mode=mode, values=values, valid_mask=valid)


def dump_estimate(est: Estimate, shape: Shape) -> str:
    dims = " ".join(str(d) for d in shape.dims)
    lines = [f"# shape {shape.order} {dims} estimate"]
    for out_idx in np.ndindex(*shape.dims):
        coords = " ".join(str(c) for c in out_idx)
        flag = int(est.fallback_mask[out_idx])
        lines.append(f"{coords} {_fmt(est.values[out_idx])} {flag}")
    return "\n".join(lines) + "\n"


def load_estimate(text: str):
    """Returns (values, fallback_mask, shape); support counts are not part
    of the exchange format."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if head[:2] != ["#", "shape"] or head[-1] != "estimate":
        raise ValueError("not an estimate dump")
    t = int(head[2])
    dims = tuple(int(x) for x in head[3:3 + t])
    values = np.full(dims, np.nan)
    fallback = np.zeros(dims, dtype=bool)
    for ln in lines[1:]:
        parts = ln.split()
        idx = tuple(int(x) for x in parts[:t])
        values[idx] = float(parts[t])
        fallback[idx] = bool(int(parts[t + 1]))
    return values, fallback, Shape(dims)
