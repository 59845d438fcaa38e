"""Shuffle-model realization of the pyramid release.

Each client scales its unscaled level sums by B and floors to integers,
adds two-sided Polya noise per coordinate (n clients' shares sum to a
discrete Laplace), and splits every coordinate into r additive shares
over Z_q, q = B*n.  The analyzer only ever sees the multiset of
(coordinate, share) messages; summing shares mod q, recentering to the
symmetric range, and dividing by B recovers the noisy sum.

The integer-domain noise is calibrated so that the n-client aggregate
divided by B converges to the central-model Laplace with scale 1/eps_i:
one client changes a level's integer vector by up to B in l1, so the
discrete Laplace parameter is exp(-eps_i / B).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .grid import MASS_TOLERANCE, SparseDist, num_levels
from .noise import NoiseSchedule, discrete_laplace_share
from .pyramid import PyramidVec, partition_sums


class ShuffleMessage(NamedTuple):
    coord: int
    share: int


@dataclass(frozen=True)
class ShuffleParams:
    """Protocol parameters; q, m, r are derived in from_schedule."""

    B: int
    n: int
    eps: float
    delta: float
    schedule: NoiseSchedule
    resolution: int
    q: int
    m: int
    r: int

    @classmethod
    def from_schedule(
        cls,
        B: int,
        n: int,
        delta: float,
        schedule: NoiseSchedule,
        resolution: int,
    ) -> "ShuffleParams":
        if B < 1:
            raise ValueError("B must be >= 1")
        ell = num_levels(resolution)
        if schedule.start_level + len(schedule.epsilons) - 1 != ell:
            raise ValueError("schedule does not match the grid resolution")
        m = sum(4**i for i in range(schedule.start_level, ell + 1))
        q = B * n
        r = compute_r(schedule.total, delta, m, q, n)
        return cls(B, n, schedule.total, delta, schedule, resolution, q, m, r)

    def level_slices(self) -> list[tuple[int, int, int]]:
        """(level, offset, count) for each measured level's coordinate block."""
        out = []
        offset = 0
        ell = num_levels(self.resolution)
        for i in range(self.schedule.start_level, ell + 1):
            out.append((i, offset, 4**i))
            offset += 4**i
        return out


def compute_r(eps: float, delta: float, m: int, q: int, n: int) -> int:
    """Shares per coordinate so the split-and-mix sum hides each client."""
    if n < 2:
        raise ValueError("need n >= 2 users")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    num = 2.0 * math.log(math.exp(eps) + 1.0) + 2.0 * math.log(m / delta) + math.log(q)
    return math.ceil(num / math.log(n) + 1.0)


def _unscaled_measurements(p: SparseDist, params: ShuffleParams) -> np.ndarray:
    dense = p.to_dense()
    parts = [
        partition_sums(dense, level).reshape(-1)
        for level, _, _ in params.level_slices()
    ]
    return np.concatenate(parts)


def encode_client_detailed(
    p: SparseDist, params: ShuffleParams, rng: np.random.Generator
) -> tuple[list[ShuffleMessage], np.ndarray, np.ndarray]:
    """Messages plus the intermediate z and z' vectors (for diagnostics)."""
    if abs(p.total_mass - 1.0) > MASS_TOLERANCE:
        raise ValueError("client distribution must have unit mass")
    if p.resolution != params.resolution:
        raise ValueError("client resolution does not match params")

    y = _unscaled_measurements(p, params)
    z = np.floor(params.B * y).astype(np.int64)

    z_noised = z.copy()
    for level, offset, count in params.level_slices():
        eps_int = params.schedule.epsilon(level) / params.B
        noise = discrete_laplace_share(params.n, eps_int, rng, size=count)
        z_noised[offset : offset + count] += noise

    q = params.q
    r = params.r
    shares = rng.integers(0, q, size=(params.m, r - 1), dtype=np.int64)
    last = (z_noised - shares.sum(axis=1)) % q
    messages = []
    for coord in range(params.m):
        for b in range(r - 1):
            messages.append(ShuffleMessage(coord, int(shares[coord, b])))
        messages.append(ShuffleMessage(coord, int(last[coord])))
    return messages, z, z_noised


def encode_client(
    p: SparseDist, params: ShuffleParams, rng: np.random.Generator
) -> list[ShuffleMessage]:
    return encode_client_detailed(p, params, rng)[0]


def analyze(messages: Iterable[ShuffleMessage], params: ShuffleParams) -> PyramidVec:
    """Fold the multiset into y' (order never matters)."""
    sums = np.zeros(params.m, dtype=np.int64)
    q = params.q
    for msg in messages:
        if not 0 <= msg.coord < params.m:
            raise ValueError(f"message coordinate {msg.coord} out of range")
        if not 0 <= msg.share < q:
            raise ValueError(f"message share {msg.share} outside Z_q")
        sums[msg.coord] = (sums[msg.coord] + msg.share) % q

    # symmetric centering: residues above q/2 represent negative sums
    signed = np.where(sums > q // 2, sums - q, sums).astype(float)
    totals = signed / params.B

    levels = []
    for level, offset, count in params.level_slices():
        side = 1 << level
        block = totals[offset : offset + count].reshape(side, side)
        levels.append(2.0**-level * block)
    return PyramidVec(params.resolution, params.schedule.start_level, levels)


def communication(params: ShuffleParams) -> dict:
    """Per-user message and byte counts for the protocol parameters."""
    bits_per_message = math.ceil(math.log2(params.m * params.q))
    return {
        "B": params.B,
        "r": params.r,
        "m": params.m,
        "q": params.q,
        "messages_per_user": params.r * params.m,
        "bytes_per_user": params.r * params.m * math.ceil(bits_per_message / 8),
    }


def simulate_round(
    dists: list[SparseDist],
    params: ShuffleParams,
    rng: np.random.Generator,
) -> tuple[PyramidVec, dict]:
    """Run all clients through a seeded shuffler and decode.

    The report counts coordinates whose true noisy sum falls outside
    (-q/2, q/2]; any such wraparound silently corrupts that coordinate.
    """
    if len(dists) != params.n:
        raise ValueError(f"expected {params.n} client distributions")
    all_messages: list[ShuffleMessage] = []
    true_sums = np.zeros(params.m, dtype=np.int64)
    for p in dists:
        msgs, _, z_noised = encode_client_detailed(p, params, rng)
        all_messages.extend(msgs)
        true_sums += z_noised

    perm = rng.permutation(len(all_messages))
    shuffled = [all_messages[i] for i in perm]
    y_prime = analyze(shuffled, params)

    half = params.q / 2.0
    violations = int(np.count_nonzero((true_sums <= -half) | (true_sums > half)))
    report = dict(communication(params))
    report["wraparound_violations"] = violations
    return y_prime, report
