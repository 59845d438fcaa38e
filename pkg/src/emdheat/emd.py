"""Exact earth mover's distance oracles on the unit-square grid.

Two LP formulations sit behind one contract, picked per instance:

* grid-flow: min-cost flow on the 4-neighbor graph of the support
  bounding box.  The l1 ground distance is the shortest-path metric of
  that graph (edge length 1/d), so the formulation is exact and needs
  O(bbox) variables instead of O(|supp(p)| * |supp(q)|).
* bipartite: the textbook transportation LP on supp(p) x supp(q), used
  when supports are scattered over a grid too large to enumerate.

The EMD norm extends the distance to signed, unbalanced vectors: mass
may be created or destroyed at a slack rate of 2 per unit, the l1
diameter of the domain.  Both solvers run scipy's dual-simplex HiGHS,
which returns vertex (hence acyclic-flow) solutions deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Mapping

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .grid import GridPoint, SparseDist, l1_distance

SLACK_RATE = 2.0
MAX_COMBINED_SUPPORT = 2000
_NEIGHBOR_CELL_CUTOFF = 16384
_FLOW_EPS = 1e-12
_BALANCE_TOL = 1e-9


class CapacityError(ValueError):
    """Raised when an instance exceeds the exact oracle's size limits.

    Callers evaluating metrics fall back to the pyramid_l1 upper bound.
    """


@dataclass
class TransportPlan:
    """An optimal transport plan: flows keyed (source, sink), plus cost."""

    flows: dict[tuple[GridPoint, GridPoint], float]
    cost: float


def _solve(c, a_eq, b_eq) -> np.ndarray:
    res = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise RuntimeError(f"transportation LP failed: {res.message}")
    return res.x


def _unify(points: list[tuple[GridPoint, float]]):
    """Map (possibly mixed-resolution) grid points onto one common grid.

    Powers of two nest exactly: a point ix/d equals (ix * D/d)/D on the
    finer grid D.  Returns the common resolution and merged per-cell
    values keyed by (ix, iy) on that grid.
    """
    if not points:
        return 1, {}
    d = max(p.resolution for p, _ in points)
    merged: dict[tuple[int, int], float] = {}
    for p, v in points:
        f = d // p.resolution
        key = (p.ix * f, p.iy * f)
        merged[key] = merged.get(key, 0.0) + v
    return d, merged


def _bbox(cells) -> tuple[int, int, int, int]:
    xs = [c[0] for c in cells]
    ys = [c[1] for c in cells]
    return min(xs), min(ys), max(xs), max(ys)


def _neighbor_arcs(w: int, h: int) -> np.ndarray:
    """Directed 4-neighbor arcs over a w x h box, nodes row-major."""
    arcs = []
    for y in range(h):
        base = y * w
        for x in range(w):
            u = base + x
            if x + 1 < w:
                arcs.append((u, u + 1))
                arcs.append((u + 1, u))
            if y + 1 < h:
                arcs.append((u, u + w))
                arcs.append((u + w, u))
    return np.array(arcs, dtype=np.int64).reshape(-1, 2)


def _incidence(n_nodes: int, arcs: np.ndarray, extra_cols=()):
    """Node-arc incidence as sparse COO: +1 leaving, -1 entering.

    extra_cols appends single-entry columns (node, sign) for slack
    variables.
    """
    n_arcs = len(arcs)
    rows = np.concatenate([arcs[:, 0], arcs[:, 1]]) if n_arcs else np.empty(0, int)
    cols = (
        np.concatenate([np.arange(n_arcs), np.arange(n_arcs)])
        if n_arcs
        else np.empty(0, int)
    )
    data = (
        np.concatenate([np.ones(n_arcs), -np.ones(n_arcs)])
        if n_arcs
        else np.empty(0)
    )
    extra_rows = [node for node, _ in extra_cols]
    extra_col_idx = [n_arcs + j for j in range(len(extra_cols))]
    extra_data = [sign for _, sign in extra_cols]
    rows = np.concatenate([rows, np.array(extra_rows, dtype=int)])
    cols = np.concatenate([cols, np.array(extra_col_idx, dtype=int)])
    data = np.concatenate([data, np.array(extra_data, dtype=float)])
    return sparse.coo_matrix(
        (data, (rows, cols)), shape=(n_nodes, n_arcs + len(extra_cols))
    ).tocsr()


def _decompose_flows(arcs, flow, supply, demand, n_nodes):
    """Path-decompose an acyclic flow into (source, sink, amount) triples.

    supply/demand are dicts node -> positive residual amounts.  The flow
    comes from a simplex vertex, so its support is a forest and every
    walk from a supplied node along positive arcs reaches residual
    demand.  The solver only balances nodes to its feasibility
    tolerance, so walks may dead-end on residuals at that scale; those
    are dropped, never routed.  Anything larger than `dust` stalling the
    walk is a real error.
    """
    total = sum(supply.values())
    tol = 1e-7 * max(1.0, total)
    dust = 1e-5 * max(1.0, total)
    out_arcs: list[list[int]] = [[] for _ in range(n_nodes)]
    for j, (u, _) in enumerate(arcs):
        if flow[j] > tol:
            out_arcs[u].append(j)
    triples = []
    for s in sorted(supply):
        while supply.get(s, 0.0) > tol:
            path = []
            cur = s
            for _ in range(n_nodes + 1):
                if demand.get(cur, 0.0) > tol:
                    break
                j = max(
                    (j for j in out_arcs[cur] if flow[j] > tol),
                    key=lambda j: flow[j],
                    default=None,
                )
                if j is None:
                    break
                path.append(j)
                cur = arcs[j][1]
            else:
                raise RuntimeError("flow decomposition found a cycle")
            amt = supply[s]
            if path:
                amt = min(amt, min(flow[j] for j in path))
            if demand.get(cur, 0.0) > tol:
                amt = min(amt, demand[cur])
                demand[cur] -= amt
                if demand[cur] <= tol:
                    demand.pop(cur, None)
                triples.append((s, cur, amt))
            elif amt > dust:
                raise RuntimeError("flow decomposition stalled")
            # else: dead-end dust, subtracted below but not routed
            for j in path:
                flow[j] -= amt
            supply[s] -= amt
            if supply.get(s, 0.0) <= tol:
                supply.pop(s, None)
    return triples


def emd(p: SparseDist, q: SparseDist) -> tuple[float, TransportPlan]:
    """Exact EMD between equal-mass distributions, with an optimal plan.

    The distributions may live at different (power-of-two) resolutions;
    distances are taken between real coordinates.  Total masses must
    agree within 1e-9; a tiny residual imbalance is rescaled away so the
    LP is exactly feasible.
    """
    mp, mq = p.total_mass, q.total_mass
    if abs(mp - mq) > _BALANCE_TOL * max(1.0, mp, mq):
        raise ValueError(f"mass mismatch: {mp} vs {mq}")
    if mp == 0.0 or mq == 0.0:
        return 0.0, TransportPlan({}, 0.0)
    sup_p, sup_q = p.support(), q.support()
    if len(sup_p) + len(sup_q) > MAX_COMBINED_SUPPORT:
        raise CapacityError(
            f"combined support {len(sup_p) + len(sup_q)} exceeds "
            f"{MAX_COMBINED_SUPPORT}; use pyramid_l1 as an upper bound"
        )
    scale = mp / mq
    d, cells_p = _unify([(pt, m) for pt, m in p.entries.items()])
    d2, cells_q = _unify([(pt, m * scale) for pt, m in q.entries.items()])
    if d2 != d:
        # re-unify both onto the finer grid
        dd = max(d, d2)
        cells_p = {(x * (dd // d), y * (dd // d)): v for (x, y), v in cells_p.items()}
        cells_q = {
            (x * (dd // d2), y * (dd // d2)): v for (x, y), v in cells_q.items()
        }
        d = dd

    # original-point lookup for plan endpoints (one point per common cell)
    f_p = d // p.resolution
    f_q = d // q.resolution
    src_at = {(pt.ix * f_p, pt.iy * f_p): pt for pt in sup_p}
    dst_at = {(pt.ix * f_q, pt.iy * f_q): pt for pt in sup_q}

    flows: dict[tuple[GridPoint, GridPoint], float] = {}
    # cancel overlapping mass in place (zero-distance flow)
    for cell in set(cells_p) & set(cells_q):
        amt = min(cells_p[cell], cells_q[cell])
        if amt > 0:
            flows[(src_at[cell], dst_at[cell])] = amt
            cells_p[cell] -= amt
            cells_q[cell] -= amt
    cells_p = {c: v for c, v in cells_p.items() if v > _FLOW_EPS * max(1.0, mp)}
    cells_q = {c: v for c, v in cells_q.items() if v > _FLOW_EPS * max(1.0, mp)}
    rem_p = sum(cells_p.values())
    rem_q = sum(cells_q.values())
    if min(rem_p, rem_q) <= _BALANCE_TOL * max(1.0, mp):
        # residue is cancellation dust on both sides; not worth an LP
        cost = _plan_cost(flows)
        return cost, TransportPlan(flows, cost)
    # filtering may break balance at machine precision; restore it exactly
    cells_q = {c: v * (rem_p / rem_q) for c, v in cells_q.items()}

    union = list(cells_p) + [c for c in cells_q if c not in cells_p]
    x0, y0, x1, y1 = _bbox(union)
    bw, bh = x1 - x0 + 1, y1 - y0 + 1

    if bw * bh <= _NEIGHBOR_CELL_CUTOFF:
        lp_cost, triples = _grid_flow_transport(cells_p, cells_q, d, x0, y0, bw, bh)
        for (cs, ct, amt) in triples:
            key = (src_at[cs], dst_at[ct])
            flows[key] = flows.get(key, 0.0) + amt
    else:
        pts_p = list(cells_p.items())
        pts_q = list(cells_q.items())
        lp_cost, plan = _bipartite_transport(pts_p, pts_q, d)
        for (cs, ct, amt) in plan:
            key = (src_at[cs], dst_at[ct])
            flows[key] = flows.get(key, 0.0) + amt

    # the LP objective is the exact distance; the decomposed plan may
    # shed feasibility-tolerance dust and is kept for inspection only
    return lp_cost, TransportPlan(flows, lp_cost)


def _plan_cost(flows: dict[tuple[GridPoint, GridPoint], float]) -> float:
    return float(sum(amt * l1_distance(a, b) for (a, b), amt in flows.items()))


def _grid_flow_transport(cells_p, cells_q, d, x0, y0, bw, bh):
    def node(cell):
        return (cell[1] - y0) * bw + (cell[0] - x0)

    n_nodes = bw * bh
    arcs = _neighbor_arcs(bw, bh)
    b = np.zeros(n_nodes)
    for cell, v in cells_p.items():
        b[node(cell)] += v
    for cell, v in cells_q.items():
        b[node(cell)] -= v
    c = np.full(len(arcs), 1.0 / d)
    x = _solve(c, _incidence(n_nodes, arcs), b)
    cost = float(c @ x)

    supply = {node(cell): v for cell, v in cells_p.items()}
    demand = {node(cell): v for cell, v in cells_q.items()}
    triples = _decompose_flows(arcs, x.copy(), supply, demand, n_nodes)
    back = {}
    for cell in cells_p:
        back[node(cell)] = cell
    back_q = {}
    for cell in cells_q:
        back_q[node(cell)] = cell
    return cost, [(back[s], back_q[t], amt) for s, t, amt in triples]


def _bipartite_transport(pts_p, pts_q, d):
    n_p, n_q = len(pts_p), len(pts_q)
    if n_p * n_q > 1_500_000:
        raise CapacityError(
            f"bipartite transportation with {n_p * n_q} variables is too large"
        )
    px = np.array([c[0][0] for c in pts_p], dtype=float)
    py = np.array([c[0][1] for c in pts_p], dtype=float)
    qx = np.array([c[0][0] for c in pts_q], dtype=float)
    qy = np.array([c[0][1] for c in pts_q], dtype=float)
    dist = (
        np.abs(px[:, None] - qx[None, :]) + np.abs(py[:, None] - qy[None, :])
    ) / d
    c = dist.ravel()
    rows_p = np.repeat(np.arange(n_p), n_q)
    rows_q = n_p + np.tile(np.arange(n_q), n_p)
    cols = np.arange(n_p * n_q)
    a_eq = sparse.coo_matrix(
        (
            np.ones(2 * n_p * n_q),
            (np.concatenate([rows_p, rows_q]), np.concatenate([cols, cols])),
        ),
        shape=(n_p + n_q, n_p * n_q),
    ).tocsr()
    b_eq = np.concatenate(
        [[v for _, v in pts_p], [v for _, v in pts_q]]
    )
    x = _solve(c, a_eq, b_eq)
    cost = float(c @ x)
    x = x.reshape(n_p, n_q)
    total = b_eq[:n_p].sum()
    plan = []
    for i, j in zip(*np.nonzero(x > _FLOW_EPS * max(1.0, total))):
        plan.append((pts_p[i][0], pts_q[j][0], float(x[i, j])))
    return cost, plan


def emd_norm(
    w: Mapping[GridPoint, float] | np.ndarray, resolution: int | None = None
) -> float:
    """EMD norm of a signed grid vector.

    Minimizes EMD(p, q) + 2 * ||r||_1 over decompositions p - q + r = w
    with p, q nonnegative and of equal mass.  Realized as a min-cost
    flow: net outflow at each support cell equals w there, and slack
    variables create/destroy mass at rate 2 per unit.  For mass-balanced
    w the slack is never profitable and the value equals EMD(w+, w-).
    """
    if isinstance(w, np.ndarray):
        arr = np.asarray(w, dtype=float)
        if resolution is None:
            resolution = arr.shape[0]
        entries = {}
        for iy, ix in zip(*np.nonzero(arr)):
            entries[GridPoint(int(ix), int(iy), resolution)] = float(arr[iy, ix])
        w = entries
    items = [(p, v) for p, v in w.items() if v != 0.0]
    if not items:
        return 0.0
    if len(items) > MAX_COMBINED_SUPPORT:
        raise CapacityError(
            f"support {len(items)} exceeds {MAX_COMBINED_SUPPORT}; "
            "use pyramid_l1 as an upper bound"
        )
    d, cells = _unify(items)
    cells = {c: v for c, v in cells.items() if v != 0.0}
    if not cells:
        return 0.0
    scale = max(abs(v) for v in cells.values())

    x0, y0, x1, y1 = _bbox(list(cells))
    bw, bh = x1 - x0 + 1, y1 - y0 + 1

    if bw * bh <= _NEIGHBOR_CELL_CUTOFF:
        def node(cell):
            return (cell[1] - y0) * bw + (cell[0] - x0)

        n_nodes = bw * bh
        arcs = _neighbor_arcs(bw, bh)
        support_nodes = [node(c) for c in cells]
        extra = []
        for u in support_nodes:
            extra.append((u, 1.0))   # r+ : mass created at u
            extra.append((u, -1.0))  # r- : mass destroyed at u
        a_eq = _incidence(n_nodes, arcs, extra)
        b = np.zeros(n_nodes)
        for cell, v in cells.items():
            b[node(cell)] = v
        c = np.concatenate(
            [np.full(len(arcs), 1.0 / d), np.full(len(extra), SLACK_RATE)]
        )
    else:
        pts = list(cells.items())
        n = len(pts)
        if n * (n - 1) > 1_500_000:
            raise CapacityError(f"{n} scattered support points is too large")
        coords = np.array([c for c, _ in pts], dtype=float)
        pair_arcs = [(i, j) for i in range(n) for j in range(n) if i != j]
        arcs = np.array(pair_arcs, dtype=np.int64).reshape(-1, 2)
        dist = (
            np.abs(coords[arcs[:, 0], 0] - coords[arcs[:, 1], 0])
            + np.abs(coords[arcs[:, 0], 1] - coords[arcs[:, 1], 1])
        ) / d
        extra = []
        for u in range(n):
            extra.append((u, 1.0))
            extra.append((u, -1.0))
        a_eq = _incidence(n, arcs, extra)
        b = np.array([v for _, v in pts])
        c = np.concatenate([dist, np.full(len(extra), SLACK_RATE)])

    x = _solve(c, a_eq, b)
    val = float(c @ x)
    return 0.0 if val < _FLOW_EPS * max(1.0, scale) else val


def best_k_sparse_error(x: SparseDist, k: int) -> float:
    """Brute-force optimal k-sparse EMD approximation error.

    Equals the k-median transport cost: every candidate support C of k
    grid points receives each mass at its nearest center, so the error
    is min over C of sum_p x(p) * min_{c in C} ||p - c||_1.  Exhaustive
    over all candidate supports; intended for the small-grid test
    regime.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    sup = x.support()
    if len(sup) <= k:
        return 0.0
    d = x.resolution
    n_cand = d * d
    if comb(n_cand, k) > 250_000:
        raise CapacityError(
            f"C({n_cand},{k}) candidate supports is beyond the brute-force "
            "regime; use clustering.brute_kmedian on coarse candidates"
        )
    masses = np.array([x.entries[p] for p in sup])
    sx = np.array([p.ix for p in sup], dtype=float)
    sy = np.array([p.iy for p in sup], dtype=float)
    cand = np.array([(cx, cy) for cy in range(d) for cx in range(d)], dtype=float)
    dists = (
        np.abs(sx[:, None] - cand[None, :, 0])
        + np.abs(sy[:, None] - cand[None, :, 1])
    ) / d
    best = np.inf
    for combo in combinations(range(n_cand), k):
        cost = float(masses @ dists[:, combo].min(axis=1))
        if cost < best:
            best = cost
    return best
