"""Attribute space [0,1]^d with a metric and a measurable grid partition.

The attribute space is always the unit cube. Cells are axis-aligned boxes on a
regular grid with k boxes per axis, half-open except that the last box on each
axis is closed, so the cells tile [0,1]^d exactly and every point has a unique
cell index.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

SUP = "sup"
EUCLIDEAN = "euclidean"
_METRICS = (SUP, EUCLIDEAN)


@dataclass(frozen=True)
class SpaceConfig:
    """Unit cube [0,1]^d together with the metric used for distances."""

    d: int
    metric: str = SUP

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.metric not in _METRICS:
            raise ValueError(f"metric must be one of {_METRICS}, got {self.metric!r}")

    @property
    def diameter(self) -> float:
        """Diameter of the unit cube: 1 under sup-norm, sqrt(d) under euclidean."""
        return 1.0 if self.metric == SUP else float(np.sqrt(self.d))

    def distance(self, x, y) -> np.ndarray:
        """Pairwise or elementwise distance; broadcasts over leading axes."""
        diff = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
        if self.metric == SUP:
            return diff.max(axis=-1)
        return np.sqrt((diff**2).sum(axis=-1))


def pairwise_distances(xs: np.ndarray, ys: np.ndarray, metric: str = SUP) -> np.ndarray:
    """(n, d) x (m, d) -> (n, m) distance matrix under the chosen metric."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    diff = np.abs(xs[:, None, :] - ys[None, :, :])
    if metric == SUP:
        return diff.max(axis=-1)
    if metric == EUCLIDEAN:
        return np.sqrt((diff**2).sum(axis=-1))
    raise ValueError(f"unknown metric {metric!r}")


@dataclass(frozen=True)
class Partition:
    """Regular grid decomposition of [0,1]^d into m = k_per_axis^d cells.

    ``lows``/``highs`` are (m, d) arrays of box corners in C order of the
    per-axis indices, so cell index = ravel_multi_index(axis indices).
    """

    space: SpaceConfig
    k_per_axis: int
    lows: np.ndarray = field(repr=False)
    highs: np.ndarray = field(repr=False)

    @property
    def d(self) -> int:
        return self.space.d

    @property
    def m(self) -> int:
        return self.k_per_axis**self.d

    @property
    def cell_diams(self) -> np.ndarray:
        side = 1.0 / self.k_per_axis
        diam = side if self.space.metric == SUP else side * np.sqrt(self.d)
        return np.full(self.m, diam)

    @property
    def max_diam(self) -> float:
        return float(self.cell_diams.max())

    @property
    def cell_volumes(self) -> np.ndarray:
        return np.full(self.m, float(self.k_per_axis) ** (-self.d))


def _k_for_request(m_request: int, d: int) -> int:
    """Smallest integer k with k^d >= m_request (float-fuzz safe)."""
    if m_request < 1:
        raise ValueError(f"m_request must be >= 1, got {m_request}")
    k = max(1, int(np.ceil(m_request ** (1.0 / d) - 1e-9)))
    while k**d < m_request:
        k += 1
    while k > 1 and (k - 1) ** d >= m_request:
        k -= 1
    return k


def build_grid_partition(space: SpaceConfig, m_request: int) -> Partition:
    """Grid partition with k_per_axis = ceil(m_request^(1/d)); realized m = k^d."""
    k = _k_for_request(m_request, space.d)
    edges = np.arange(k + 1, dtype=float) / k
    axes_lo = [edges[:-1]] * space.d
    axes_hi = [edges[1:]] * space.d
    grids_lo = np.meshgrid(*axes_lo, indexing="ij")
    grids_hi = np.meshgrid(*axes_hi, indexing="ij")
    lows = np.stack([g.ravel() for g in grids_lo], axis=1)
    highs = np.stack([g.ravel() for g in grids_hi], axis=1)
    return Partition(space=space, k_per_axis=k, lows=lows, highs=highs)


def cell_indices(partition: Partition, x: np.ndarray) -> np.ndarray:
    """Cell index in [0, m) for each point; rejects points outside [0,1]^d.

    Boundary convention: half-open boxes, except the last cell per axis is
    closed (so x=1.0 lands in the final cell).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != partition.d:
        raise ValueError(f"points have dimension {x.shape[1]}, expected {partition.d}")
    if np.any(x < 0.0) or np.any(x > 1.0):
        bad = np.where(np.any((x < 0.0) | (x > 1.0), axis=1))[0][0]
        raise ValueError(f"point {bad} outside [0,1]^d: {x[bad]}")
    k = partition.k_per_axis
    axis_idx = np.minimum((x * k).astype(np.int64), k - 1)
    flat = np.zeros(x.shape[0], dtype=np.int64)
    for j in range(partition.d):
        flat = flat * k + axis_idx[:, j]
    return flat


def cell_index(partition: Partition, x) -> int:
    """Single-point version of :func:`cell_indices`."""
    return int(cell_indices(partition, np.atleast_2d(x))[0])


def sample_uniform_in_cell(partition: Partition, k: int, rng: np.random.Generator) -> np.ndarray:
    """Point uniformly distributed on cell k."""
    if not 0 <= k < partition.m:
        raise IndexError(f"cell index {k} out of range [0, {partition.m})")
    lo, hi = partition.lows[k], partition.highs[k]
    return lo + rng.random(partition.d) * (hi - lo)


def sample_uniform_in_cells(partition: Partition, ks: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Vectorized :func:`sample_uniform_in_cell` for an index array."""
    ks = np.asarray(ks, dtype=np.int64)
    if ks.size and (ks.min() < 0 or ks.max() >= partition.m):
        raise IndexError("cell index out of range")
    lo = partition.lows[ks]
    hi = partition.highs[ks]
    return lo + rng.random((ks.size, partition.d)) * (hi - lo)


@dataclass(frozen=True)
class AttributeDataset:
    """Finite set of attribute points in [0,1]^d."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("dataset must contain at least one point")
        if np.any(pts < 0.0) or np.any(pts > 1.0):
            raise ValueError("dataset points must lie in [0,1]^d")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def load_points_csv(path: str, d: int, header: bool = False) -> AttributeDataset:
    """Read d decimal columns from a CSV file; out-of-range values are rejected
    with their row number (1-based, counting the header if present)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if header and lineno == 1:
                continue
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < d:
                raise ValueError(f"row {lineno}: expected {d} columns, got {len(row)}")
            try:
                vals = [float(c) for c in row[:d]]
            except ValueError as exc:
                raise ValueError(f"row {lineno}: non-numeric value ({exc})") from None
            for v in vals:
                if not 0.0 <= v <= 1.0:
                    raise ValueError(f"row {lineno}: value {v} outside [0,1]")
            rows.append(vals)
    if not rows:
        raise ValueError(f"no data rows in {path}")
    return AttributeDataset(points=np.asarray(rows, dtype=float))
