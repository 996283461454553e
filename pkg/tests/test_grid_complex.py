import pytest
import sys
import os

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

from grid_complex import (
    CellId,
    GridComplex,
    GridSizingError,
    PaddingError,
    build_grid,
    coboundary,
    dual_shift_field,
)
from shapes_sdf import Disk, ScalarField, sample_sdf


# ── Sizing ─────────────────────────────────────────────────────────────────────

def test_fig_example_grid_counts():
    grid = build_grid(([0, 0], [3, 3]), 1.0, 2, padding=0)
    assert grid.shape == (4, 4)
    assert grid.num_cells(0) == 16
    assert grid.num_cells(1) == 24
    assert grid.num_cells(2) == 9


def test_single_cell_grid():
    grid = build_grid(([0, 0], [1, 1]), 1.0, 2, padding=0)
    assert (grid.num_cells(0), grid.num_cells(1), grid.num_cells(2)) == (4, 4, 1)


def test_unit_cube_half_spacing_counts():
    grid = build_grid((0.0, 1.0), 0.5, 3, padding=0)
    assert [grid.num_cells(k) for k in range(4)] == [27, 54, 36, 8]


def test_sliver_bbox_still_gets_one_cell():
    grid = build_grid(([0.0, 0.0], [1e-12, 1.0]), 1.0, 2, padding=0)
    assert grid.shape == (2, 2)
    upper = np.asarray(grid.origin) + grid.l_g * (np.asarray(grid.shape) - 1)
    assert np.all(upper >= [1e-12, 1.0])


def test_padding_adds_layers_on_every_side():
    grid = build_grid(([0, 0], [3, 3]), 1.0, 2)
    assert grid.shape == (6, 6)
    assert grid.origin == (-1.0, -1.0)


def test_non_integer_extent_rounds_up():
    grid = build_grid(([0, 0], [2.5, 1.0]), 1.0, 2, padding=0)
    assert grid.shape == (4, 2)


@pytest.mark.parametrize("l_g", [0.0, -1.0, float("inf")])
def test_bad_grid_length_rejected(l_g):
    with pytest.raises(GridSizingError):
        build_grid(([0, 0], [1, 1]), l_g, 2)


def test_degenerate_bbox_rejected():
    with pytest.raises(GridSizingError, match="degenerate"):
        build_grid(([0, 0], [1, 0]), 0.5, 2)


def test_overflowing_grid_rejected():
    with pytest.raises(GridSizingError, match="more than"):
        build_grid((0.0, 1.0), 1e-4, 3)


# ── Indexing ───────────────────────────────────────────────────────────────────

def test_cell_index_round_trip_3d():
    grid = GridComplex(dim=3, origin=(0.0, 0.0, 0.0), l_g=1.0, shape=(3, 4, 2))
    for k in range(4):
        for i in range(grid.num_cells(k)):
            assert grid.cell_index(grid.cell_id(k, i)) == i


def test_class_order_and_x_fastest_numbering():
    grid = GridComplex(dim=2, origin=(0.0, 0.0), l_g=1.0, shape=(4, 4))
    # x-edges come first, 3 per row
    assert grid.cell_id(1, 0) == CellId(1, (0,), (0, 0))
    assert grid.cell_id(1, 1) == CellId(1, (0,), (1, 0))
    assert grid.cell_id(1, 3) == CellId(1, (0,), (0, 1))
    assert grid.cell_id(1, 12) == CellId(1, (1,), (0, 0))


def test_cell_index_rejects_out_of_range_coords():
    grid = GridComplex(dim=2, origin=(0.0, 0.0), l_g=1.0, shape=(4, 4))
    with pytest.raises(ValueError, match="outside"):
        grid.cell_index(CellId(1, (0,), (3, 0)))


def test_cell_vertices_of_a_face():
    grid = GridComplex(dim=2, origin=(0.0, 0.0), l_g=1.0, shape=(3, 3))
    corners = grid.cell_vertices(2)[0]
    # corner bits: x then y
    assert corners.tolist() == [0, 1, 3, 4]


# ── Coboundary ─────────────────────────────────────────────────────────────────

def test_edge_row_points_along_axis():
    grid = GridComplex(dim=2, origin=(0.0, 0.0), l_g=1.0, shape=(4, 4))
    row = coboundary(grid, 0)[0].toarray().ravel()
    assert row[0] == -1 and row[1] == 1
    assert np.count_nonzero(row) == 2


@pytest.mark.parametrize("shape", [(4, 3), (3, 4, 5)])
def test_coboundary_squares_to_zero(shape):
    grid = GridComplex(dim=len(shape), origin=(0.0,) * len(shape), l_g=0.5, shape=shape)
    for k in range(grid.dim - 1):
        product = coboundary(grid, k + 1) @ coboundary(grid, k)
        assert product.nnz == 0 or np.abs(product.toarray()).max() == 0


@pytest.mark.parametrize("k,per_row", [(0, 2), (1, 4), (2, 6)])
def test_coboundary_row_support(k, per_row):
    grid = GridComplex(dim=3, origin=(0.0, 0.0, 0.0), l_g=1.0, shape=(3, 3, 3))
    D = coboundary(grid, k)
    assert D.shape == (grid.num_cells(k + 1), grid.num_cells(k))
    assert set(np.diff(D.indptr)) == {per_row}
    assert set(np.unique(D.data)) == {-1.0, 1.0}


def test_single_face_boundary_cycle():
    grid = GridComplex(dim=2, origin=(0.0, 0.0), l_g=1.0, shape=(2, 2))
    D1 = coboundary(grid, 1).toarray()
    assert D1.shape == (1, 4)
    assert D1.sum() == 0
    assert np.abs(D1).sum() == 4


def test_coboundary_degree_out_of_range():
    grid = GridComplex(dim=2, origin=(0.0, 0.0), l_g=1.0, shape=(2, 2))
    with pytest.raises(ValueError):
        coboundary(grid, 2)


# ── Dual shift ─────────────────────────────────────────────────────────────────

def test_analytic_shift_is_exact():
    grid = build_grid(([-1, -1], [1, 1]), 0.25, 2)
    disk = Disk(R=1.0)
    shifted = dual_shift_field(sample_sdf(disk, grid))
    expected = disk.sdf(grid.dual().vertex_positions())
    assert shifted.grid == grid.dual()
    np.testing.assert_array_equal(shifted.values, expected)


def test_constant_field_stays_constant():
    grid = GridComplex(dim=2, origin=(0.0, 0.0), l_g=1.0, shape=(4, 4))
    field = ScalarField(grid, np.full(16, 2.5))
    assert np.all(dual_shift_field(field).values == 2.5)


def test_linear_field_shifts_by_half_cell():
    grid = GridComplex(dim=2, origin=(0.0, 0.0), l_g=1.0, shape=(5, 3))
    x = grid.vertex_positions()[:, 0]
    field = ScalarField(grid, x + 10.0)
    shifted = dual_shift_field(field)
    dual_x = shifted.grid.vertex_positions()[:, 0]
    np.testing.assert_allclose(shifted.values, dual_x + 10.0)


def test_unpadded_sampled_field_cannot_shift():
    grid = build_grid(([-1, -1], [1, 1]), 0.5, 2, padding=0)
    field = ScalarField(grid, Disk(R=1.2).sdf(grid.vertex_positions()))
    with pytest.raises(PaddingError):
        dual_shift_field(field)
