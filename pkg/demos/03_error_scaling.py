"""
How the estimation error responds to eps and w
==============================================

Two knobs control the accuracy of the private average: the privacy
budget eps and the published support size w.  The total error splits
into mechanism noise, which shrinks as the budget grows, and support
truncation, a floor that only a larger w can lower.  Sweeping one knob
at a time makes both parts visible.
"""

import numpy as np

from emdheat.aggregate import AggregationConfig, aggregate_central
from emdheat.datagen import random_mixture_spec, synth_users
from emdheat.emd import emd_norm
from emdheat.grid import SparseDist
from emdheat.noise import make_rng

d = 64
users, _ = synth_users(random_mixture_spec(8, 100, 40, d, seed=3))
dense = sum(u.to_dense() for u in users) / len(users)
a_true = SparseDist.from_dense(dense, d)


def err(eps: float, w: int, trial: int) -> float:
    cfg = AggregationConfig(eps=eps, w=w, mode="experiment")
    res = aggregate_central(users, cfg, rng=make_rng((int(eps * 100), w, trial)))
    return emd_norm(a_true.minus(res.a_hat), d)


def mean_err(eps: float, w: int, trials: int = 5) -> float:
    return float(np.mean([err(eps, w, t) for t in range(trials)]))


# an absurd budget silences the noise, leaving pure truncation error
def floor(w: int) -> float:
    return err(1e9, w, 0)


# sweep eps at fixed w: the error falls until it hits the floor
f20 = floor(20)
print("eps sweep, w=20")
print("  eps     err")
for eps in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0):
    print(f"  {eps:5.2f}  {mean_err(eps, 20):.4f}")
print(f"  floor  {f20:.4f}")

# sweep w at fixed eps: each doubling halves the floor, but the total
# error stalls once mechanism noise is the bigger term
print("\nw sweep, eps=2")
print("   w     err    floor")
for w in (5, 10, 20, 40, 80, 160):
    print(f"  {w:3d}  {mean_err(2.0, w):.4f}  {floor(w):.4f}")
