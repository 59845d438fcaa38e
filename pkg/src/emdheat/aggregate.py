"""End-to-end private aggregation mechanisms.

aggregate_central: pyramid measurements of the user sum with per-level
Laplace noise, then sparse reconstruction.  aggregate_dense: snap to a
coarse grid chosen from the total budget, noise every cell, repair with
a transport-norm projection.  baseline_laplace: per-cell noise with an
optional keep-top-t-percent threshold.

All mechanisms take the unnormalized sum s = sum_u p_u.  Each user's
distribution has unit mass and the level sums partition the grid, so
one user changes each level of P s by at most 1 in l1; Lap(1/eps_i)
per cell therefore spends eps_i per level and sum(eps_i) = eps total.
Everything after the noisy release is post-processing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .grid import MASS_TOLERANCE, GridPoint, SparseDist, num_levels
from .noise import NoiseSchedule, budget_schedule, laplace, make_rng, pivot_level
from .pyramid import PyramidVec, partition_sums
from .recovery import reconstruct

_MODES = ("theory", "experiment")


@dataclass(frozen=True)
class AggregationConfig:
    eps: float
    w: int = 20
    mode: str = "theory"
    gamma: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.w < 1:
            raise ValueError("w must be >= 1")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")
        if self.gamma is not None and not 0.5 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0.5, 1)")

    @property
    def effective_gamma(self) -> float:
        if self.gamma is not None:
            return self.gamma
        return 0.8 if self.mode == "theory" else 2.0 ** -0.5

    def start_level(self, resolution: int) -> int:
        if self.mode == "theory":
            return 0
        return min(pivot_level(self.w), num_levels(resolution))


@dataclass
class AggregateResult:
    a_hat: SparseDist
    s_hat: SparseDist
    y_prime: PyramidVec | None
    schedule: NoiseSchedule | None
    degenerate: bool = False
    n_users: int = 0


def _checked_sum(dists: list[SparseDist]) -> tuple[np.ndarray, int]:
    if not dists:
        raise ValueError("need at least one user distribution")
    resolution = dists[0].resolution
    total = np.zeros((resolution, resolution))
    for p in dists:
        if p.resolution != resolution:
            raise ValueError("user distributions must share one resolution")
        if abs(p.total_mass - 1.0) > MASS_TOLERANCE:
            raise ValueError("every user distribution must have unit mass")
        total += p.to_dense()
    return total, len(dists)


def aggregate_central(
    dists: list[SparseDist],
    cfg: AggregationConfig,
    rng: np.random.Generator | None = None,
) -> AggregateResult:
    """Noisy pyramid release of the user sum, then sparse recovery."""
    s, n = _checked_sum(dists)
    resolution = dists[0].resolution
    ell = num_levels(resolution)
    start = cfg.start_level(resolution)
    schedule = budget_schedule(cfg.eps, ell, cfg.w, cfg.effective_gamma, start)
    if rng is None:
        rng = make_rng(cfg.seed)

    levels = []
    for i in range(start, ell + 1):
        sums = partition_sums(s, i)
        noise = laplace(schedule.scale(i), rng, sums.shape)
        levels.append(2.0 ** -i * (sums + noise))
    y_prime = PyramidVec(resolution, start, levels)

    s_hat = reconstruct(y_prime, cfg.w)
    a_hat, degenerate = normalize(s_hat)
    return AggregateResult(a_hat, s_hat, y_prime, schedule, degenerate, n)


def normalize(s_hat: SparseDist) -> tuple[SparseDist, bool]:
    """s_hat scaled to unit mass; uniform fallback when all mass is gone."""
    total = s_hat.total_mass
    if total <= 0.0:
        d = s_hat.resolution
        u = 1.0 / (d * d)
        entries = {GridPoint(ix, iy, d): u for iy in range(d) for ix in range(d)}
        return SparseDist(d, entries), True
    return s_hat.scaled(1.0 / total), False


def _dense_fit(noisy: np.ndarray, resolution: int) -> np.ndarray:
    """argmin_{v >= 0} emd_norm(v - noisy) as one min-cost-flow LP.

    Variables: v per cell (free objective), directed 4-neighbor arcs at
    cost 1/resolution, and +/- slack per cell at rate 2.  Node balance:
    out - in + r+ - r- - v = -noisy.
    """
    d = resolution
    n_cells = d * d
    arcs = []
    for y in range(d):
        for x in range(d):
            u = y * d + x
            if x + 1 < d:
                arcs.append((u, u + 1))
                arcs.append((u + 1, u))
            if y + 1 < d:
                arcs.append((u, u + d))
                arcs.append((u + d, u))
    n_arcs = len(arcs)
    n_vars = n_cells + n_arcs + 2 * n_cells

    rows, cols, data = [], [], []
    for u in range(n_cells):
        rows.append(u)
        cols.append(u)
        data.append(-1.0)
    for j, (u, v) in enumerate(arcs):
        col = n_cells + j
        rows.extend([u, v])
        cols.extend([col, col])
        data.extend([1.0, -1.0])
    for u in range(n_cells):
        rows.extend([u, u])
        cols.extend([n_cells + n_arcs + u, n_cells + n_arcs + n_cells + u])
        data.extend([1.0, -1.0])
    a_eq = sparse.coo_matrix((data, (rows, cols)), shape=(n_cells, n_vars)).tocsr()

    cost = np.zeros(n_vars)
    cost[n_cells : n_cells + n_arcs] = 1.0 / d
    cost[n_cells + n_arcs :] = 2.0
    b_eq = -noisy.reshape(-1)

    res = linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise RuntimeError(f"dense fit LP failed: {res.message}")
    return res.x[:n_cells].reshape(d, d)


def aggregate_dense(
    dists: list[SparseDist],
    eps: float,
    seed: int = 0,
    rng: np.random.Generator | None = None,
) -> AggregateResult:
    """Coarse-grid variant: snap, noise every cell once, project back."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not dists:
        raise ValueError("need at least one user distribution")
    resolution = dists[0].resolution
    n = len(dists)
    ell_star = max(0, int(math.floor(math.log2(math.sqrt(eps * n)))))
    coarse = min(1 << ell_star, resolution)
    snapped = [p.at_resolution(coarse) for p in dists]
    s, _ = _checked_sum(snapped)

    if rng is None:
        rng = make_rng(seed)
    noisy = s + laplace(1.0 / eps, rng, s.shape)
    fit = _dense_fit(noisy, coarse)
    s_hat = SparseDist.from_dense(fit, coarse)
    a_hat, degenerate = normalize(s_hat)
    return AggregateResult(a_hat, s_hat, None, None, degenerate, n)


def baseline_laplace(
    dists: list[SparseDist],
    eps: float,
    threshold_pct: float | None = None,
    seed: int = 0,
    rng: np.random.Generator | None = None,
) -> SparseDist:
    """Per-cell Laplace on the sum, clip negatives, optional top-t% keep."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if threshold_pct is not None and not 0 < threshold_pct <= 100:
        raise ValueError("threshold_pct must lie in (0, 100]")
    s, _ = _checked_sum(dists)
    d = s.shape[0]
    if rng is None:
        rng = make_rng(seed)
    noisy = s + laplace(1.0 / eps, rng, s.shape)

    if threshold_pct is not None:
        keep = math.ceil(threshold_pct / 100.0 * d * d)
        flat = noisy.reshape(-1)
        # stable sort on -value keeps row-major order among ties
        order = np.argsort(-flat, kind="stable")
        mask = np.zeros(d * d, dtype=bool)
        mask[order[:keep]] = True
        flat = np.where(mask, flat, 0.0)
        noisy = flat.reshape(d, d)

    noisy = np.maximum(noisy, 0.0)
    out, _ = normalize(SparseDist.from_dense(noisy, d))
    return out


def coreset(
    points: list[GridPoint],
    eps: float,
    w: int,
    mode: str = "theory",
    seed: int = 0,
    rng: np.random.Generator | None = None,
) -> SparseDist:
    """Unnormalized recovery of one-point indicator users (k-median coreset)."""
    if not points:
        raise ValueError("need at least one point")
    resolution = points[0].resolution
    dists = [SparseDist(resolution, {p: 1.0}) for p in points]
    cfg = AggregationConfig(eps=eps, w=w, mode=mode, seed=seed)
    return aggregate_central(dists, cfg, rng=rng).s_hat
