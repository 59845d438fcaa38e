"""The scaled pyramidal transform.

For a vector v on the resolution-d grid (d = 2**l), the level-i
partition map sums v inside each of the 4**i level-i cells.  The scaled
pyramidal transform stacks all levels with per-level weights 2**-i:

    P v = [ P_0 v, 2**-1 P_1 v, ..., 2**-l P_l v ]

The l1 norm of P z upper-bounds the EMD norm of z for mass-balanced z,
which is what makes the transform useful: l1-sparse recovery on P-space
transfers to EMD guarantees on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import CellId, SparseDist, num_levels


@dataclass
class PyramidVec:
    """Per-level measurement arrays.

    levels[j] holds level i = start_level + j as a (2**i, 2**i) array
    indexed [cy, cx].  start_level = 0 is the full transform; the
    experiment pipeline starts at level q and never materializes the
    coarser levels (they are not measured and carry no privacy budget).
    Values may be negative once noise is added.
    """

    resolution: int
    start_level: int
    levels: list[np.ndarray]

    def __post_init__(self) -> None:
        ell = num_levels(self.resolution)
        expected = ell - self.start_level + 1
        if len(self.levels) != expected:
            raise ValueError(
                f"expected {expected} level arrays for start_level "
                f"{self.start_level}, got {len(self.levels)}"
            )
        for j, arr in enumerate(self.levels):
            i = self.start_level + j
            if arr.shape != (1 << i, 1 << i):
                raise ValueError(f"level {i} array has shape {arr.shape}")

    @property
    def max_level(self) -> int:
        return self.start_level + len(self.levels) - 1

    def level(self, i: int) -> np.ndarray:
        if not self.start_level <= i <= self.max_level:
            raise ValueError(f"level {i} not materialized")
        return self.levels[i - self.start_level]

    def value(self, c: CellId) -> float:
        return float(self.level(c.level)[c.cy, c.cx])

    def copy(self) -> "PyramidVec":
        return PyramidVec(
            self.resolution, self.start_level, [a.copy() for a in self.levels]
        )


def _as_dense(v: SparseDist | np.ndarray) -> np.ndarray:
    if isinstance(v, SparseDist):
        return v.to_dense()
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square grid array, got shape {arr.shape}")
    return arr


def partition_sums(v: SparseDist | np.ndarray, level: int) -> np.ndarray:
    """Unscaled level sums: entry [cy, cx] is the total of v inside that cell."""
    arr = _as_dense(v)
    d = arr.shape[0]
    ell = num_levels(d)
    if not 0 <= level <= ell:
        raise ValueError(f"level {level} outside [0, {ell}]")
    side = 1 << level
    block = d // side
    return arr.reshape(side, block, side, block).sum(axis=(1, 3))


def apply_pyramid(v: SparseDist | np.ndarray, start_level: int = 0) -> PyramidVec:
    """The scaled transform: level i array is 2**-i * partition_sums(v, i)."""
    arr = _as_dense(v)
    d = arr.shape[0]
    ell = num_levels(d)
    if not 0 <= start_level <= ell:
        raise ValueError(f"start_level {start_level} outside [0, {ell}]")
    levels = [
        partition_sums(arr, i) * (2.0 ** -i) for i in range(start_level, ell + 1)
    ]
    return PyramidVec(d, start_level, levels)


def pyramid_l1(z: SparseDist | np.ndarray, start_level: int = 0) -> float:
    """The l1 norm of the scaled transform of a signed grid vector.

    Sum over levels i of 2**-i * sum over cells of |cell sum of z|.
    For mass-balanced z this upper-bounds emd_norm(z), so it serves as
    the documented surrogate when exact transportation is too large.
    """
    arr = _as_dense(z)
    d = arr.shape[0]
    ell = num_levels(d)
    total = 0.0
    for i in range(start_level, ell + 1):
        total += (2.0 ** -i) * float(np.abs(partition_sums(arr, i)).sum())
    return total
