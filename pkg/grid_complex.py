"""
Cartesian cell complexes on axis-aligned grids.

A k-cell is identified by the axes it spans (its axis class) and the
integer coordinates of its lowest corner. Within a class cells are
numbered x-fastest over the per-axis cell counts; classes follow the
order returned by GridComplex.axis_classes(k). Global k-cell indices
concatenate the classes in that order, so a fixture can name any cell
by absolute index.

Class order per dimension:
    2D  k=1: x, y          k=2: xy
    3D  k=1: x, y, z       k=2: xy, yz, zx       k=3: xyz
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple, Sequence, Union

import numpy as np
import scipy.sparse as sp

if TYPE_CHECKING:
    from shapes_sdf import ScalarField

logger = logging.getLogger("gridhodge.grid")

# Cell indices are stored as int64 but must stay addressable by
# 32-bit sparse index arrays.
MAX_CELLS = 2**31 - 1

_AXIS_CLASSES: dict[int, dict[int, list[tuple[int, ...]]]] = {
    2: {0: [()], 1: [(0,), (1,)], 2: [(0, 1)]},
    3: {0: [()], 1: [(0,), (1,), (2,)], 2: [(0, 1), (1, 2), (2, 0)], 3: [(0, 1, 2)]},
}


class GridSizingError(ValueError):
    """Grid length, bounding box or resulting cell count is unusable."""


class PaddingError(ValueError):
    """A sampled field cannot be shifted because the domain touches the grid edge."""


class CellId(NamedTuple):
    k: int
    axes: tuple[int, ...]
    coords: tuple[int, ...]


def _class_coords(counts: Sequence[int]) -> np.ndarray:
    """Integer lowest-corner coordinates of every cell of a class, x-fastest."""
    if any(c <= 0 for c in counts):
        return np.zeros((0, len(counts)), dtype=np.int64)
    return np.stack([a.ravel(order="F") for a in np.indices(counts, dtype=np.int64)], axis=1)


def _permutation_sign(order: Sequence[int]) -> int:
    inversions = sum(1 for i in range(len(order)) for j in range(i + 1, len(order)) if order[i] > order[j])
    return -1 if inversions % 2 else 1


@dataclass(frozen=True)
class GridComplex:
    dim: int
    origin: tuple[float, ...]
    l_g: float
    shape: tuple[int, ...]  # vertex count per axis

    def __post_init__(self):
        if self.dim not in _AXIS_CLASSES:
            raise GridSizingError(f"dim must be 2 or 3, got {self.dim}")
        if len(self.origin) != self.dim or len(self.shape) != self.dim:
            raise GridSizingError("origin and shape must have one entry per axis")
        if not (self.l_g > 0 and math.isfinite(self.l_g)):
            raise GridSizingError(f"l_g must be a positive finite number, got {self.l_g}")
        if any(n < 1 for n in self.shape):
            raise GridSizingError(f"every axis needs at least one vertex, got {self.shape}")

    # ── Cell bookkeeping ──────────────────────────────────────────────────────

    def axis_classes(self, k: int) -> list[tuple[int, ...]]:
        if not 0 <= k <= self.dim:
            raise ValueError(f"k must lie in [0, {self.dim}], got {k}")
        return _AXIS_CLASSES[self.dim][k]

    def class_counts(self, axes: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(n - 1 if axis in axes else n for axis, n in enumerate(self.shape))

    def class_offsets(self, k: int) -> list[int]:
        offsets, total = [], 0
        for axes in self.axis_classes(k):
            offsets.append(total)
            total += math.prod(self.class_counts(axes))
        return offsets

    def num_cells(self, k: int) -> int:
        return sum(math.prod(self.class_counts(axes)) for axes in self.axis_classes(k))

    def cell_index(self, cell: CellId) -> int:
        classes = self.axis_classes(cell.k)
        if cell.axes not in classes:
            raise ValueError(f"{cell.axes} is not an axis class of {cell.k}-cells; expected one of {classes}")
        counts = self.class_counts(cell.axes)
        if len(cell.coords) != self.dim or any(not 0 <= c < n for c, n in zip(cell.coords, counts)):
            raise ValueError(f"coordinates {cell.coords} outside class counts {counts}")
        local = int(np.ravel_multi_index(cell.coords, counts, order="F"))
        return self.class_offsets(cell.k)[classes.index(cell.axes)] + local

    def cell_id(self, k: int, index: int) -> CellId:
        if not 0 <= index < self.num_cells(k):
            raise ValueError(f"{k}-cell index {index} out of range")
        offsets = self.class_offsets(k)
        ci = int(np.searchsorted(offsets, index, side="right")) - 1
        axes = self.axis_classes(k)[ci]
        coords = np.unravel_index(index - offsets[ci], self.class_counts(axes), order="F")
        return CellId(k, axes, tuple(int(c) for c in coords))

    # ── Geometry ──────────────────────────────────────────────────────────────

    def vertex_positions(self) -> np.ndarray:
        """World coordinates of all vertices, shape (n_0, dim)."""
        coords = _class_coords(self.shape)
        return np.asarray(self.origin) + self.l_g * coords

    def cell_vertices(self, k: int) -> np.ndarray:
        """
        Vertex indices of every k-cell, shape (n_k, 2**k).

        Corner b of a cell with axes (a_0, ..., a_{k-1}) sits at the lowest
        corner plus one step along a_j for every set bit j of b.
        """
        blocks = []
        for axes in self.axis_classes(k):
            coords = _class_coords(self.class_counts(axes))
            corners = []
            for b in range(2**k):
                shifted = coords.copy()
                for j, axis in enumerate(axes):
                    if b >> j & 1:
                        shifted[:, axis] += 1
                corners.append(np.ravel_multi_index(tuple(shifted.T), self.shape, order="F"))
            blocks.append(np.stack(corners, axis=1) if len(coords) else np.zeros((0, 2**k), dtype=np.int64))
        return np.concatenate(blocks, axis=0).astype(np.int64)

    def dual(self) -> GridComplex:
        """The grid of primal top-cell centres (origin + l_g/2, one vertex fewer per axis)."""
        if any(n < 2 for n in self.shape):
            raise GridSizingError("a dual grid needs at least two vertices per axis")
        return GridComplex(
            dim=self.dim,
            origin=tuple(o + 0.5 * self.l_g for o in self.origin),
            l_g=self.l_g,
            shape=tuple(n - 1 for n in self.shape),
        )


BBox = tuple[Union[float, Sequence[float]], Union[float, Sequence[float]]]


def build_grid(bbox: BBox, l_g: float, dim: int, padding: int = 1) -> GridComplex:
    """
    Cover bbox = (lower, upper) with cubes of side l_g, adding `padding`
    extra vertex layers on every side. Scalar bounds apply to every axis.
    """
    if dim not in _AXIS_CLASSES:
        raise GridSizingError(f"dim must be 2 or 3, got {dim}")
    if not (l_g > 0 and math.isfinite(l_g)):
        raise GridSizingError(f"l_g must be a positive finite number, got {l_g}")
    if padding < 0:
        raise GridSizingError("padding must be >= 0")

    lower = np.broadcast_to(np.asarray(bbox[0], dtype=float), (dim,))
    upper = np.broadcast_to(np.asarray(bbox[1], dtype=float), (dim,))
    if np.any(upper <= lower):
        raise GridSizingError(f"degenerate bounding box {lower.tolist()} .. {upper.tolist()}")

    cells = np.maximum(np.ceil((upper - lower) / l_g - 1e-9).astype(np.int64), 1)
    shape = tuple(int(c) + 1 + 2 * padding for c in cells)
    largest = max(math.prod(shape) * math.comb(dim, k) for k in range(dim + 1))
    if largest > MAX_CELLS:
        raise GridSizingError(f"grid {shape} would need more than {MAX_CELLS} cells of one dimension")

    grid = GridComplex(dim=dim, origin=tuple(float(x) for x in lower - padding * l_g), l_g=float(l_g), shape=shape)
    logger.debug("grid %s l_g=%g origin=%s", shape, l_g, grid.origin)
    return grid


def coboundary(grid: GridComplex, k: int) -> sp.csr_matrix:
    """
    Signed incidence D_k from k-cells to (k+1)-cells, shape (n_{k+1}, n_k).

    Each row carries 2(k+1) entries of ±1: the far and near faces of the
    cell across each spanned axis, signed by the axis position and by the
    orientation of the face's own axis class.
    """
    if not 0 <= k < grid.dim:
        raise ValueError(f"coboundary degree must lie in [0, {grid.dim - 1}], got {k}")

    face_classes = grid.axis_classes(k)
    row_offsets = grid.class_offsets(k + 1)
    col_offsets = grid.class_offsets(k)
    rows, cols, vals = [], [], []

    for ci, axes in enumerate(grid.axis_classes(k + 1)):
        coords = _class_coords(grid.class_counts(axes))
        if not len(coords):
            continue
        row = row_offsets[ci] + np.arange(len(coords), dtype=np.int64)
        for pos, axis in enumerate(axes):
            rest = axes[:pos] + axes[pos + 1:]
            fi = next(i for i, c in enumerate(face_classes) if set(c) == set(rest))
            face_axes = face_classes[fi]
            sign = (-1) ** pos * _permutation_sign([face_axes.index(a) for a in rest])
            face_counts = grid.class_counts(face_axes)
            for step, side in ((0, -1), (1, 1)):
                shifted = coords.copy()
                shifted[:, axis] += step
                col = col_offsets[fi] + np.ravel_multi_index(tuple(shifted.T), face_counts, order="F")
                rows.append(row)
                cols.append(col)
                vals.append(np.full(len(row), float(side * sign)))

    shape = (grid.num_cells(k + 1), grid.num_cells(k))
    if not rows:
        return sp.csr_matrix(shape)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=shape,
    )


def dual_shift_field(sdf: ScalarField, grid: GridComplex | None = None) -> ScalarField:
    """
    Resample an SDF at the primal top-cell centres, i.e. on grid.dual().

    Fields that remember their analytic shape are evaluated exactly;
    sampled fields use multilinear interpolation (the corner mean) and
    must leave the outermost vertex layer outside the domain.
    """
    grid = grid or sdf.grid
    if sdf.grid != grid:
        raise ValueError("field was sampled on a different grid")
    dual = grid.dual()

    if sdf.shape is not None:
        values = sdf.shape.sdf(dual.vertex_positions())
    else:
        coords = _class_coords(grid.shape)
        on_edge = np.any((coords == 0) | (coords == np.asarray(grid.shape) - 1), axis=1)
        if np.any(sdf.values[on_edge] <= 0):
            raise PaddingError("sampled field reaches the outermost grid layer; re-sample with padding >= 1")
        values = sdf.values[grid.cell_vertices(grid.dim)].mean(axis=1)

    return dataclasses.replace(sdf, grid=dual, values=np.asarray(values, dtype=float))
