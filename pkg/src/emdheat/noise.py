"""Noise sources and the per-level privacy budget schedule.

The central mechanism adds Laplace noise of scale 1/eps_i to the
unscaled level-i partition sums; each user's vector contributes at most
1 to each level's l1 norm, so level i is eps_i-private and the levels
compose to eps = sum eps_i.  The budget decays geometrically away from
the pivot level q = floor(log2(sqrt(w))), where the support width w
meets the cell count 4^q.

The shuffle protocol replaces continuous Laplace with a sum of integer
Polya shares: n i.i.d. Polya(1/n, alpha) variables sum to a negative
binomial NB(1, alpha) = geometric, and the difference of two such sums
is exactly the discrete Laplace with parameter alpha.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import exp

import numpy as np


@dataclass(frozen=True)
class RngSeed:
    """A (seed, stream) pair; identical pairs yield identical draws."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((self.seed, self.stream)))
        )


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    return RngSeed(seed, stream).generator()


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-level budgets eps_i for levels start_level..max_level.

    Invariants: the budgets sum to `total` exactly up to float rounding,
    and adjacent ratios are gamma or 1/gamma.
    """

    epsilons: tuple[float, ...]
    gamma: float
    q_level: int
    total: float
    start_level: int

    @property
    def max_level(self) -> int:
        return self.start_level + len(self.epsilons) - 1

    def epsilon(self, level: int) -> float:
        if not self.start_level <= level <= self.max_level:
            raise ValueError(f"level {level} not in schedule")
        return self.epsilons[level - self.start_level]

    def scale(self, level: int) -> float:
        """Laplace scale 1/eps_i for level i."""
        return 1.0 / self.epsilon(level)


def pivot_level(w: int) -> int:
    """q = floor(log2(sqrt(w))), the deepest level with 4^q <= w."""
    if w < 1:
        raise ValueError("w must be >= 1")
    return (w.bit_length() - 1) // 2


def budget_schedule(
    eps: float, ell: int, w: int, gamma: float, start_level: int = 0
) -> NoiseSchedule:
    """Geometric budget split eps_i = gamma^|i-q| * eps / Z over levels.

    Z normalizes over the scheduled levels [start_level, ell] so the
    budgets sum to eps.  The utility analysis needs gamma in (0.5, 1):
    below 0.5 the per-level noise sums diverge with depth.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not 0.5 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0.5, 1), got {gamma}")
    if ell < 0:
        raise ValueError("ell must be >= 0")
    if not 0 <= start_level <= ell:
        raise ValueError(f"start_level {start_level} outside [0, {ell}]")
    q = pivot_level(w)
    weights = np.array(
        [gamma ** abs(i - q) for i in range(start_level, ell + 1)], dtype=float
    )
    z = weights.sum()
    eps_i = tuple(float(v) for v in weights * (eps / z))
    return NoiseSchedule(eps_i, gamma, q, eps, start_level)


def laplace(
    b: float, rng: np.random.Generator, size: int | tuple[int, ...] | None = None
):
    """Laplace noise of scale b (mean 0, variance 2 b^2)."""
    if b <= 0:
        raise ValueError("scale must be positive")
    return rng.laplace(0.0, b, size)


def polya(
    r: float,
    p: float,
    rng: np.random.Generator,
    size: int | tuple[int, ...] | None = None,
):
    """Polya (negative binomial with real shape r) draw(s).

    Sampled as Poisson(Gamma(r, p/(1-p))); mean r p / (1 - p).  The
    family is infinitely divisible: n draws at shape r/n sum to one draw
    at shape r.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0,1), got {p}")
    if r <= 0:
        raise ValueError("r must be positive")
    lam = rng.gamma(r, p / (1.0 - p), size)
    draw = rng.poisson(lam)
    if size is None:
        return int(draw)
    return draw.astype(np.int64)


def discrete_laplace_share(
    n: int,
    eps_i: float,
    rng: np.random.Generator,
    size: int | tuple[int, ...] | None = None,
):
    """One client's additive noise share: X+ - X- with Polya(1/n, e^-eps_i).

    Summed over n clients the shares are exactly discrete Laplace with
    pmf proportional to e^{-eps_i |k|}.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if eps_i <= 0:
        raise ValueError("eps_i must be positive")
    alpha = exp(-eps_i)
    plus = polya(1.0 / n, alpha, rng, size)
    minus = polya(1.0 / n, alpha, rng, size)
    if size is None:
        return int(plus) - int(minus)
    return (plus - minus).astype(np.int64)
