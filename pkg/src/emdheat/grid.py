"""Grid geometry for distributions on the unit square.

The domain is [0,1) x [0,1), discretized to the grid
G_d = {(ix/d, iy/d) : 0 <= ix, iy < d} for a power-of-two resolution
d = 2**l.  Cells at level i are the half-open dyadic squares of side
2**-i; the level-i cells partition the square, each cell at level i >= 1
has one parent and four children, and level-l cells coincide with grid
points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

import numpy as np


class GridPoint(NamedTuple):
    """A point of G_d, carried with its resolution.

    Real coordinates are (ix / resolution, iy / resolution).
    """

    ix: int
    iy: int
    resolution: int

    @property
    def x(self) -> float:
        return self.ix / self.resolution

    @property
    def y(self) -> float:
        return self.iy / self.resolution


class CellId(NamedTuple):
    """A dyadic cell: level plus cell coordinates in [0, 2**level)."""

    level: int
    cx: int
    cy: int


ROOT = CellId(0, 0, 0)


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def num_levels(resolution: int) -> int:
    """l such that resolution = 2**l."""
    if not is_power_of_two(resolution):
        raise ValueError(f"resolution must be a power of two, got {resolution}")
    return resolution.bit_length() - 1


def next_pow2(n: int) -> int:
    """Smallest power of two >= n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 1 << (n - 1).bit_length()


def snap(x: float, y: float, resolution: int) -> GridPoint:
    """Snap a point of [0,1)^2 to its grid point (floor(x*d), floor(y*d))."""
    if not (0.0 <= x < 1.0 and 0.0 <= y < 1.0):
        raise ValueError(f"point ({x}, {y}) outside [0,1)^2")
    if not is_power_of_two(resolution):
        raise ValueError(f"resolution must be a power of two, got {resolution}")
    return GridPoint(int(x * resolution), int(y * resolution), resolution)


def containing_cell(p: GridPoint, level: int) -> CellId:
    """The unique level-`level` cell containing p."""
    ell = num_levels(p.resolution)
    if not 0 <= level <= ell:
        raise ValueError(f"level {level} outside [0, {ell}]")
    shift = ell - level
    return CellId(level, p.ix >> shift, p.iy >> shift)


def children(c: CellId) -> list[CellId]:
    """The four level+1 cells tiling c, in ascending (cy, cx) order."""
    lv = c.level + 1
    return [
        CellId(lv, 2 * c.cx, 2 * c.cy),
        CellId(lv, 2 * c.cx + 1, 2 * c.cy),
        CellId(lv, 2 * c.cx, 2 * c.cy + 1),
        CellId(lv, 2 * c.cx + 1, 2 * c.cy + 1),
    ]


def parent(c: CellId) -> CellId:
    if c.level <= 0:
        raise ValueError("the root cell has no parent")
    return CellId(c.level - 1, c.cx >> 1, c.cy >> 1)


def cell_anchor(c: CellId, resolution: int) -> GridPoint:
    """The minimal grid point inside cell c (its lower-left corner)."""
    ell = num_levels(resolution)
    if not 0 <= c.level <= ell:
        raise ValueError(f"cell level {c.level} outside [0, {ell}]")
    shift = ell - c.level
    return GridPoint(c.cx << shift, c.cy << shift, resolution)


def l1_distance(a: GridPoint, b: GridPoint) -> float:
    """Ground distance |ax-bx| + |ay-by| in real coordinates."""
    return abs(a.x - b.x) + abs(a.y - b.y)


MASS_TOLERANCE = 1e-9


@dataclass(frozen=True)
class SparseDist:
    """A nonnegative sparse vector over grid points.

    Zero entries are dropped on construction; negative masses are
    rejected.  User inputs are probability distributions (total mass 1
    within 1e-9); aggregates carry arbitrary nonnegative total mass.
    """

    resolution: int
    entries: Mapping[GridPoint, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not is_power_of_two(self.resolution):
            raise ValueError(f"resolution must be a power of two, got {self.resolution}")
        clean: dict[GridPoint, float] = {}
        for p, m in self.entries.items():
            if m < 0:
                raise ValueError(f"negative mass {m} at {p}")
            if p.resolution != self.resolution:
                raise ValueError(f"point resolution {p.resolution} != {self.resolution}")
            if not (0 <= p.ix < self.resolution and 0 <= p.iy < self.resolution):
                raise ValueError(f"point {p} outside the grid")
            if m > 0:
                clean[p] = float(m)
        object.__setattr__(self, "entries", clean)

    @property
    def total_mass(self) -> float:
        return float(sum(self.entries.values()))

    def is_distribution(self, tol: float = MASS_TOLERANCE) -> bool:
        return abs(self.total_mass - 1.0) <= tol

    def support(self) -> list[GridPoint]:
        return sorted(self.entries, key=lambda p: (p.iy, p.ix))

    def scaled(self, factor: float) -> "SparseDist":
        if factor < 0:
            raise ValueError("scaling factor must be nonnegative")
        return SparseDist(
            self.resolution, {p: m * factor for p, m in self.entries.items()}
        )

    def minus(self, other: "SparseDist") -> dict[GridPoint, float]:
        """Signed difference self - other as a sparse map.

        The two operands may live at different resolutions; points are
        compared by identity (resolution is part of the key), which is
        what the EMD-norm oracle expects.
        """
        diff: dict[GridPoint, float] = dict(self.entries)
        for p, m in other.entries.items():
            diff[p] = diff.get(p, 0.0) - m
        return {p: v for p, v in diff.items() if v != 0.0}

    def to_dense(self) -> np.ndarray:
        """Dense (d, d) array indexed [iy, ix]."""
        arr = np.zeros((self.resolution, self.resolution))
        for p, m in self.entries.items():
            arr[p.iy, p.ix] += m
        return arr

    @staticmethod
    def from_dense(arr: np.ndarray, resolution: int | None = None) -> "SparseDist":
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected a square array, got shape {arr.shape}")
        d = arr.shape[0] if resolution is None else resolution
        if arr.shape != (d, d):
            raise ValueError("array shape does not match resolution")
        iy, ix = np.nonzero(arr)
        entries = {
            GridPoint(int(cx), int(cy), d): float(arr[cy, cx])
            for cy, cx in zip(iy, ix)
        }
        return SparseDist(d, entries)

    @staticmethod
    def from_points(
        points: Iterable[tuple[float, float]], resolution: int
    ) -> "SparseDist":
        """Empirical distribution of real-coordinate points, snapped."""
        counts: dict[GridPoint, float] = {}
        n = 0
        for x, y in points:
            p = snap(x, y, resolution)
            counts[p] = counts.get(p, 0.0) + 1.0
            n += 1
        if n == 0:
            raise ValueError("no points given")
        return SparseDist(resolution, {p: c / n for p, c in counts.items()})

    def at_resolution(self, resolution: int) -> "SparseDist":
        """Re-grid to another power-of-two resolution.

        Coarsening sums masses into containing cells; refining maps each
        point to the fine point at the same real coordinates.  Both are
        exact (real coordinates i/d are preserved or snapped by floor,
        matching `snap`).
        """
        if resolution == self.resolution:
            return self
        out: dict[GridPoint, float] = {}
        if resolution < self.resolution:
            factor = self.resolution // resolution
            for p, m in self.entries.items():
                tgt = GridPoint(p.ix // factor, p.iy // factor, resolution)
                out[tgt] = out.get(tgt, 0.0) + m
        else:
            factor = resolution // self.resolution
            for p, m in self.entries.items():
                out[GridPoint(p.ix * factor, p.iy * factor, resolution)] = m
        return SparseDist(resolution, out)
