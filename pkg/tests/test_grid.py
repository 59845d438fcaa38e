"""Grid geometry: snapping, cell navigation, sparse distributions."""

import numpy as np
import pytest

from emdheat.grid import (
    ROOT,
    CellId,
    GridPoint,
    SparseDist,
    cell_anchor,
    children,
    containing_cell,
    is_power_of_two,
    l1_distance,
    next_pow2,
    num_levels,
    parent,
    snap,
)

from helpers import gp


def test_snap_origin():
    assert snap(0.0, 0.0, 4) == GridPoint(0, 0, 4)


def test_snap_floor_arithmetic():
    assert snap(0.26, 0.74, 4) == GridPoint(1, 2, 4)


def test_snap_boundary_floor():
    assert snap(0.999, 0.001, 8) == GridPoint(7, 0, 8)


def test_snap_rejects_out_of_range():
    with pytest.raises(ValueError):
        snap(1.0, 0.5, 4)
    with pytest.raises(ValueError):
        snap(0.5, -0.01, 4)
    with pytest.raises(ValueError):
        snap(0.5, 0.5, 3)


def test_containing_cell_root():
    assert containing_cell(gp(3, 3, 4), 0) == ROOT


def test_containing_cell_quadrant():
    assert containing_cell(gp(3, 3, 4), 1) == CellId(1, 1, 1)


def test_containing_cell_leaf_level_is_point():
    assert containing_cell(gp(0, 2, 4), 2) == CellId(2, 0, 2)


def test_containing_cell_level_bounds():
    with pytest.raises(ValueError):
        containing_cell(gp(0, 0, 4), 3)
    with pytest.raises(ValueError):
        containing_cell(gp(0, 0, 4), -1)


def test_children_of_root():
    assert children(ROOT) == [
        CellId(1, 0, 0),
        CellId(1, 1, 0),
        CellId(1, 0, 1),
        CellId(1, 1, 1),
    ]


def test_parent_halving():
    assert parent(CellId(2, 3, 1)) == CellId(1, 1, 0)


def test_parent_of_root_rejected():
    with pytest.raises(ValueError):
        parent(ROOT)


def test_parent_child_inverse():
    rng = np.random.default_rng(3)
    for _ in range(50):
        level = int(rng.integers(0, 5))
        c = CellId(level, int(rng.integers(0, 1 << level)), int(rng.integers(0, 1 << level)))
        for child in children(c):
            assert parent(child) == c


def test_containing_cell_chain_consistency():
    rng = np.random.default_rng(4)
    d = 16
    for _ in range(50):
        p = gp(int(rng.integers(0, d)), int(rng.integers(0, d)), d)
        for i in range(num_levels(d)):
            assert containing_cell(p, i) == parent(containing_cell(p, i + 1))


def test_children_partition_cell():
    # the four children tile the parent: every leaf in the parent lies in
    # exactly one child
    d = 8
    c = CellId(1, 1, 0)
    inside = [
        gp(ix, iy, d)
        for ix in range(d)
        for iy in range(d)
        if containing_cell(gp(ix, iy, d), 1) == c
    ]
    assert len(inside) == (d // 2) ** 2
    for p in inside:
        owners = [ch for ch in children(c) if containing_cell(p, 2) == ch]
        assert len(owners) == 1


def test_power_of_two_helpers():
    assert [is_power_of_two(n) for n in (1, 2, 3, 4, 6, 8)] == [
        True, True, False, True, False, True,
    ]
    assert num_levels(16) == 4
    with pytest.raises(ValueError):
        num_levels(12)
    assert next_pow2(1) == 1
    assert next_pow2(5) == 8
    assert next_pow2(64) == 64


def test_cell_anchor_is_lower_left():
    assert cell_anchor(CellId(1, 1, 1), 8) == GridPoint(4, 4, 8)
    assert cell_anchor(ROOT, 4) == GridPoint(0, 0, 4)


def test_l1_distance_real_coordinates():
    assert l1_distance(gp(0, 0, 4), gp(1, 0, 4)) == pytest.approx(0.25)
    assert l1_distance(gp(0, 0, 4), gp(2, 4, 8)) == pytest.approx(0.75)


def test_sparse_dist_drops_zeros_rejects_negative():
    d = SparseDist(4, {gp(0, 0, 4): 1.0, gp(1, 1, 4): 0.0})
    assert list(d.entries) == [gp(0, 0, 4)]
    with pytest.raises(ValueError):
        SparseDist(4, {gp(0, 0, 4): -0.5})


def test_sparse_dist_rejects_out_of_grid_point():
    with pytest.raises(ValueError):
        SparseDist(4, {gp(4, 0, 4): 1.0})
    with pytest.raises(ValueError):
        SparseDist(4, {gp(0, 0, 8): 1.0})


def test_sparse_dist_mass_and_distribution_check():
    d = SparseDist(4, {gp(0, 0, 4): 0.25, gp(3, 3, 4): 0.75})
    assert d.total_mass == pytest.approx(1.0)
    assert d.is_distribution()
    assert not d.scaled(2.0).is_distribution()


def test_sparse_dist_dense_round_trip():
    rng = np.random.default_rng(5)
    arr = rng.random((8, 8)) * (rng.random((8, 8)) > 0.6)
    d = SparseDist.from_dense(arr)
    assert d.resolution == 8
    np.testing.assert_allclose(d.to_dense(), arr)


def test_sparse_dist_from_points_counts():
    d = SparseDist.from_points([(0.1, 0.1), (0.1, 0.1), (0.9, 0.9)], 4)
    assert d.entries[gp(0, 0, 4)] == pytest.approx(2 / 3)
    assert d.entries[gp(3, 3, 4)] == pytest.approx(1 / 3)


def test_at_resolution_round_trip_and_coarsen():
    d = SparseDist(8, {gp(1, 1, 8): 0.5, gp(2, 3, 8): 0.5})
    up = d.at_resolution(16)
    assert up.entries[gp(2, 2, 16)] == pytest.approx(0.5)
    # coarsening the refined version returns the original
    assert up.at_resolution(8).entries == d.entries
    down = d.at_resolution(4)
    assert down.entries[gp(0, 0, 4)] == pytest.approx(0.5)
    assert down.entries[gp(1, 1, 4)] == pytest.approx(0.5)


def test_minus_sparse_difference():
    a = SparseDist(4, {gp(0, 0, 4): 1.0, gp(1, 0, 4): 0.5})
    b = SparseDist(4, {gp(1, 0, 4): 0.5, gp(2, 0, 4): 0.25})
    diff = a.minus(b)
    assert diff == {gp(0, 0, 4): 1.0, gp(2, 0, 4): -0.25}


def test_support_sorted_row_major():
    d = SparseDist(4, {gp(3, 1, 4): 0.2, gp(0, 1, 4): 0.3, gp(2, 0, 4): 0.5})
    assert d.support() == [gp(2, 0, 4), gp(0, 1, 4), gp(3, 1, 4)]
