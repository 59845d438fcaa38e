"""Support selection and the l1-fit reconstruction."""

import numpy as np
import pytest
from scipy import sparse
from scipy.optimize import linprog

from emdheat.emd import emd
from emdheat.grid import CellId, GridPoint, SparseDist, containing_cell, num_levels
from emdheat.noise import make_rng
from emdheat.pyramid import PyramidVec, apply_pyramid
from emdheat.recovery import (
    fit_objective,
    l1_fit,
    reconstruct,
    restrict,
    select_support,
)

from helpers import delta, gp, rand_sparse


def full_l1_fit_objective(y_hat: PyramidVec) -> float:
    """Oracle: minimize ||y_hat - P s'||_1 over ALL nonnegative grid vectors.

    Dense formulation with one variable per grid point and one residual
    variable per measured cell, for cross-checking that the reduced
    variable class of l1_fit loses nothing.
    """
    d = y_hat.resolution
    ell = num_levels(d)
    start = y_hat.start_level
    n_vars = d * d
    rows, cols, data, y_vals = [], [], [], []
    r = 0
    for i in range(start, ell + 1):
        arr = y_hat.level(i)
        side = 1 << i
        block = d // side
        for cy in range(side):
            for cx in range(side):
                y_vals.append(float(arr[cy, cx]))
                for yy in range(cy * block, (cy + 1) * block):
                    for xx in range(cx * block, (cx + 1) * block):
                        rows.append(r)
                        cols.append(yy * d + xx)
                        data.append(2.0 ** -i)
                r += 1
    n_rows = r
    m = sparse.coo_matrix((data, (rows, cols)), shape=(n_rows, n_vars)).tocsr()
    y_arr = np.array(y_vals)
    cost = np.concatenate([np.zeros(n_vars), np.ones(n_rows)])
    t_block = -sparse.identity(n_rows, format="csr")
    a_ub = sparse.vstack(
        [sparse.hstack([-m, t_block]), sparse.hstack([m, t_block])]
    ).tocsr()
    b_ub = np.concatenate([-y_arr, y_arr])
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=(0, None), method="highs-ds")
    assert res.status == 0
    return float(res.fun)


def test_select_support_single_chain():
    y = apply_pyramid(delta(2, 1, 8))
    sel = select_support(y, 1)
    point = gp(2, 1, 8)
    for i in range(num_levels(8) + 1):
        assert sel.level_cells(i) == [containing_cell(point, i)]


def test_select_support_keeps_everything_for_large_w():
    rng = make_rng(40)
    y = apply_pyramid(rand_sparse(np.random.default_rng(41), 4, 5))
    sel = select_support(y, 16)
    for i in range(3):
        assert len(sel.level_cells(i)) == 4 ** i


def test_select_support_two_chain_example():
    # s = {(0,0): 3, (3,3): 1} at resolution 4, w = 2
    s = SparseDist(4, {gp(0, 0, 4): 3.0, gp(3, 3, 4): 1.0})
    sel = select_support(apply_pyramid(s), 2)
    assert sel.level_cells(0) == [CellId(0, 0, 0)]
    assert sel.level_cells(1) == [CellId(1, 0, 0), CellId(1, 1, 1)]
    assert sel.level_cells(2) == [CellId(2, 0, 0), CellId(2, 3, 3)]


def test_select_support_tie_break_ascending_cy_cx():
    # equal values everywhere: ties go to ascending (cy, cx)
    y = PyramidVec(4, 0, [np.ones((1, 1)), np.ones((2, 2)), np.ones((4, 4))])
    sel = select_support(y, 2)
    assert sel.level_cells(1) == [CellId(1, 0, 0), CellId(1, 1, 0)]
    assert sel.level_cells(2) == [CellId(2, 0, 0), CellId(2, 1, 0)]


def test_restrict_zeroes_unselected_cells():
    s = SparseDist(4, {gp(0, 0, 4): 3.0, gp(3, 3, 4): 1.0})
    y = apply_pyramid(s)
    sel = select_support(y, 1)
    y_hat = restrict(y, sel)
    assert y_hat.value(CellId(1, 0, 0)) == pytest.approx(1.5)
    assert y_hat.value(CellId(1, 1, 1)) == 0.0
    assert y_hat.value(CellId(2, 3, 3)) == 0.0


def test_zero_noise_exact_recovery():
    rng = np.random.default_rng(42)
    for k in (1, 3, 5):
        s = rand_sparse(rng, 16, k, mass=float(rng.uniform(0.5, 4.0)))
        s_hat = reconstruct(apply_pyramid(s), 20)
        cost, _ = emd(s.scaled(1 / s.total_mass), s_hat.scaled(1 / s_hat.total_mass))
        assert cost <= 1e-6
        assert fit_objective(apply_pyramid(s), s_hat) <= 1e-7


def test_zero_measurement_recovers_zero():
    y = PyramidVec(4, 0, [np.zeros((1, 1)), np.zeros((2, 2)), np.zeros((4, 4))])
    sel = select_support(y, 4)
    s_hat = l1_fit(restrict(y, sel), sel)
    assert s_hat.total_mass == 0.0


def test_negative_root_recovers_zero():
    # nonnegativity binds: nothing can fit a negative measurement
    levels = [np.full((1, 1), -2.0), np.zeros((2, 2)), np.zeros((4, 4))]
    y = PyramidVec(4, 0, levels)
    sel = select_support(y, 4)
    s_hat = l1_fit(restrict(y, sel), sel)
    assert s_hat.total_mass == 0.0


def test_reduced_lp_matches_full_lp():
    # the aggregated-subtree variable class is lossless: the reduced LP
    # attains the unrestricted optimum
    rng = np.random.default_rng(43)
    noise_rng = make_rng(44)
    for w in (1, 2, 4):
        s = rand_sparse(rng, 4, 3)
        y = apply_pyramid(s)
        for j, arr in enumerate(y.levels):
            y.levels[j] = arr + noise_rng.laplace(0, 0.15, arr.shape)
        sel = select_support(y, w)
        y_hat = restrict(y, sel)
        s_hat = l1_fit(y_hat, sel)
        reduced = fit_objective(y_hat, s_hat)
        full = full_l1_fit_objective(y_hat)
        assert reduced == pytest.approx(full, abs=1e-8)


def test_objective_monotone_in_w_zero_noise():
    rng = np.random.default_rng(45)
    s = rand_sparse(rng, 8, 6)
    y = apply_pyramid(s)
    objectives = []
    for w in (1, 2, 3, 4, 6, 8):
        sel = select_support(y, w)
        y_hat = restrict(y, sel)
        s_hat = l1_fit(y_hat, sel)
        objectives.append(fit_objective(y_hat, s_hat))
    for a, b in zip(objectives, objectives[1:]):
        assert b <= a + 1e-9
    assert objectives[-1] <= 1e-9


def test_recovery_bound_on_tree_sparse_instances():
    # k-sparse s gives an exact measurement in the tree-sparse model
    # class; with known per-level noise the fit residual is bounded by
    # 3x the model error (zero here) plus 3x the noise mass on the
    # candidate cells
    rng = np.random.default_rng(46)
    d = 16
    ell = num_levels(d)
    for trial in range(20):
        k = int(rng.integers(1, 6))
        s = rand_sparse(rng, d, k, mass=float(rng.uniform(1.0, 3.0)))
        w = 8
        y_star = apply_pyramid(s)
        noise_rng = make_rng((47, trial))
        nu = [noise_rng.laplace(0, 0.1, (1 << i, 1 << i)) for i in range(ell + 1)]
        y_noisy = PyramidVec(
            d, 0, [y_star.level(i) + (2.0 ** -i) * nu[i] for i in range(ell + 1)]
        )
        sel = select_support(y_noisy, w)
        y_hat = restrict(y_noisy, sel)
        s_hat = l1_fit(y_hat, sel)
        lhs = fit_objective(y_hat, s_hat)

        model_err = fit_objective(y_star, s)  # zero by construction
        noise_mass = 0.0
        candidates = {0: {(0, 0)}}
        for i in range(1, ell + 1):
            cand = set()
            for c in sel.level_cells(i - 1):
                for cy in (2 * c.cy, 2 * c.cy + 1):
                    for cx in (2 * c.cx, 2 * c.cx + 1):
                        cand.add((cx, cy))
            candidates[i] = cand
        for i in range(ell + 1):
            noise_mass += (2.0 ** -i) * sum(
                abs(nu[i][cy, cx]) for cx, cy in candidates[i]
            )
        assert lhs <= 3 * model_err + 3 * noise_mass + 1e-9


def test_two_chain_example_exact_at_sufficient_width():
    s = SparseDist(4, {gp(0, 0, 4): 3.0, gp(3, 3, 4): 1.0})
    s_hat = reconstruct(apply_pyramid(s), 2)
    assert s_hat.entries[gp(0, 0, 4)] == pytest.approx(3.0, abs=1e-7)
    assert s_hat.entries[gp(3, 3, 4)] == pytest.approx(1.0, abs=1e-7)


def test_recovered_support_is_leaves_or_drop_anchors():
    # every output point is either a selected leaf or the minimal grid
    # point of a dropped subtree (the aggregated variable's anchor)
    from emdheat.grid import cell_anchor

    rng = np.random.default_rng(48)
    noise_rng = make_rng(49)
    for w in (1, 2, 3):
        s = rand_sparse(rng, 8, 4)
        y = apply_pyramid(s)
        for j, arr in enumerate(y.levels):
            y.levels[j] = arr + noise_rng.laplace(0, 0.05, arr.shape)
        sel = select_support(y, w)
        s_hat = l1_fit(restrict(y, sel), sel)
        ell = num_levels(8)
        allowed = {gp(c.cx, c.cy, 8) for c in sel.level_cells(ell)}
        for i in range(1, ell + 1):
            kept = set(sel.level_cells(i))
            for parent_cell in sel.level_cells(i - 1):
                for cy in (2 * parent_cell.cy, 2 * parent_cell.cy + 1):
                    for cx in (2 * parent_cell.cx, 2 * parent_cell.cx + 1):
                        c = CellId(i, cx, cy)
                        if c not in kept:
                            allowed.add(cell_anchor(c, 8))
        assert set(s_hat.entries) <= allowed


def test_mismatched_selection_rejected():
    y = apply_pyramid(delta(0, 0, 4))
    sel = select_support(y, 2)
    wrong = PyramidVec(4, 1, [np.zeros((2, 2)), np.zeros((4, 4))])
    with pytest.raises(ValueError):
        l1_fit(wrong, sel)
