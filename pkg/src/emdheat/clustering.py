"""Planar k-median costs, brute-force optima, and coreset quality checks.

Everything here is evaluation machinery for small instances: candidate
centers live on a coarse subgrid and center sets are enumerated
exhaustively under an explicit combination budget.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .grid import GridPoint, SparseDist, l1_distance

COMBINATION_BUDGET = 10**6


@dataclass(frozen=True)
class CenterSet:
    centers: tuple[GridPoint, ...]

    def __post_init__(self) -> None:
        if not self.centers:
            raise ValueError("a center set must be nonempty")

    def __len__(self) -> int:
        return len(self.centers)


def cost_points(points: list[GridPoint], centers: CenterSet) -> float:
    """Sum over points of l1 distance to the nearest center."""
    return sum(min(l1_distance(p, c) for c in centers.centers) for p in points)


def cost_vec(x: SparseDist, centers: CenterSet) -> float:
    """Mass-weighted nearest-center distance of a nonnegative vector."""
    return sum(
        m * min(l1_distance(p, c) for c in centers.centers)
        for p, m in x.entries.items()
    )


def _distance_matrix(points: list[GridPoint], candidates: list[GridPoint]) -> np.ndarray:
    px = np.array([p.x for p in points])
    py = np.array([p.y for p in points])
    cx = np.array([c.x for c in candidates])
    cy = np.array([c.y for c in candidates])
    return np.abs(px[:, None] - cx[None, :]) + np.abs(py[:, None] - cy[None, :])


def brute_kmedian(
    x: SparseDist, k: int, candidates: list[GridPoint]
) -> tuple[CenterSet, float]:
    """Exhaustive optimum over all k-subsets of the candidate centers."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not candidates:
        raise ValueError("need at least one candidate center")
    size = min(k, len(candidates))
    if math.comb(len(candidates), size) > COMBINATION_BUDGET:
        raise ValueError("candidate combinations exceed the enumeration budget")

    cand = sorted(candidates, key=lambda c: (c.iy, c.ix))
    support = list(x.entries)
    masses = np.array([x.entries[p] for p in support])
    if not support:
        return CenterSet((cand[0],)), 0.0
    dist = _distance_matrix(support, cand)

    best_cost = math.inf
    best: tuple[int, ...] | None = None
    for combo in combinations(range(len(cand)), size):
        cost = float(masses @ dist[:, combo].min(axis=1))
        if cost < best_cost - 1e-15:
            best_cost = cost
            best = combo
    assert best is not None
    return CenterSet(tuple(cand[i] for i in best)), best_cost


def subgrid_candidates(resolution: int, candidate_side: int) -> list[GridPoint]:
    """A candidate_side x candidate_side subgrid of G_resolution."""
    if resolution % candidate_side != 0:
        raise ValueError("candidate_side must divide the resolution")
    step = resolution // candidate_side
    return [
        GridPoint(ix * step, iy * step, resolution)
        for iy in range(candidate_side)
        for ix in range(candidate_side)
    ]


def coreset_check(
    points: list[GridPoint],
    s_hat: SparseDist,
    k: int,
    lam: float,
    eps: float,
    candidate_side: int = 8,
) -> dict:
    """Worst-case additive coreset error over a coarse candidate grid.

    For every center set C of size 1..k drawn from the candidate
    subgrid, measures |cost_C(s_hat) - cost_C(points)| - lam * cost_C(points)
    and reports the maximum as the empirical additive term kappa, with
    fitted_c = kappa * eps / sqrt(k).
    """
    if not points:
        raise ValueError("need at least one data point")
    candidates = subgrid_candidates(s_hat.resolution, candidate_side)
    total = sum(math.comb(len(candidates), j) for j in range(1, min(k, len(candidates)) + 1))
    if total > COMBINATION_BUDGET:
        raise ValueError("candidate combinations exceed the enumeration budget")

    dist_x = _distance_matrix(points, candidates)
    support = list(s_hat.entries)
    masses = np.array([s_hat.entries[p] for p in support])
    dist_s = (
        _distance_matrix(support, candidates)
        if support
        else np.zeros((0, len(candidates)))
    )

    kappa = -math.inf
    for size in range(1, min(k, len(candidates)) + 1):
        for combo in combinations(range(len(candidates)), size):
            cost_x = float(dist_x[:, combo].min(axis=1).sum())
            cost_s = float(masses @ dist_s[:, combo].min(axis=1)) if support else 0.0
            kappa = max(kappa, abs(cost_s - cost_x) - lam * cost_x)
    return {
        "k": k,
        "lambda": lam,
        "eps": eps,
        "empirical_kappa": kappa,
        "fitted_C": kappa * eps / math.sqrt(k),
    }


def write_reports_csv(reports: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["k", "lambda", "eps", "empirical_kappa", "fitted_C"])
        for rep in reports:
            writer.writerow(
                [
                    rep["k"],
                    repr(float(rep["lambda"])),
                    repr(float(rep["eps"])),
                    repr(float(rep["empirical_kappa"])),
                    repr(float(rep["fitted_C"])),
                ]
            )
