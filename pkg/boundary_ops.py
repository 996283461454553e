"""
Domain cut of a Cartesian complex.

A cell is kept when at least one of its vertices lies strictly inside the
domain (SDF < 0). Kept cells carry partial measures, i.e. the length, area
or volume of their intersection with the closed region SDF <= 0, and the
diagonal Hodge stars are ratios of full dual measures to these partial
primal measures.
"""

import logging
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Literal, Optional

import numpy as np
import scipy.sparse as sp

from grid_complex import CellId, GridComplex, dual_shift_field
from settings import get_settings
from shapes_sdf import ScalarField

logger = logging.getLogger("gridhodge.boundary")

BISECTION_STEPS = 60

# Corner b of a square face sits at (b & 1, b >> 1 & 1); walking these in
# order goes once around the face.
_SQUARE_CYCLE = (0, 1, 3, 2)
_SQUARE_LOCAL = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])

# Six tetrahedra sharing the main diagonal 0-7 of the unit cube.
_CUBE_LOCAL = np.array([[b & 1, b >> 1 & 1, b >> 2 & 1] for b in range(8)], dtype=float)
_KUHN_TETS = tuple((0, 1 << p[0], (1 << p[0]) | (1 << p[1]), 7) for p in permutations(range(3)))
_TET_EDGES = tuple(combinations(range(4), 2))


class CellNotIncludedError(ValueError):
    """The requested cell does not survive the domain cut."""


# ── Domain types ──────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class InclusionMask:
    k: int
    included: np.ndarray

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.included)

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.included))

    @property
    def reindex(self) -> np.ndarray:
        """Row of each cell in the restricted system, -1 for dropped cells."""
        out = np.full(len(self.included), -1, dtype=np.int64)
        out[self.included] = np.arange(self.count)
        return out


@dataclass(frozen=True)
class DiagonalStar:
    k: int
    bc: str
    diag: np.ndarray

    def __post_init__(self):
        diag = np.asarray(self.diag, dtype=float)
        if diag.ndim != 1:
            raise ValueError("star diagonal must be one-dimensional")
        if np.any(~np.isfinite(diag)) or np.any(diag <= 0):
            raise ValueError(f"star S_{self.k} has non-positive or non-finite entries")
        object.__setattr__(self, "diag", diag)

    def __len__(self) -> int:
        return len(self.diag)

    def matrix(self) -> sp.csr_matrix:
        return sp.diags(self.diag, format="csr")

    def inverse(self) -> "DiagonalStar":
        return DiagonalStar(self.k, self.bc, 1.0 / self.diag)


# ── Inclusion and projection ──────────────────────────────────────────────────

def classify_cells(grid: GridComplex, sdf: ScalarField, k: int) -> InclusionMask:
    if sdf.grid != grid:
        raise ValueError("field was sampled on a different grid")
    inside = sdf.values < 0
    verts = grid.cell_vertices(k)
    return InclusionMask(k=k, included=inside[verts].any(axis=1))


def projection_matrix(mask: InclusionMask) -> sp.csr_matrix:
    """0/1 selector of shape (kept cells, all cells)."""
    idx = mask.indices
    return sp.csr_matrix(
        (np.ones(len(idx)), (np.arange(len(idx)), idx)),
        shape=(len(idx), len(mask.included)),
    )


def restricted_coboundary(d_k: sp.spmatrix, p_k: sp.spmatrix, p_k1: sp.spmatrix) -> sp.csr_matrix:
    """P_{k+1} D_k P_k^T."""
    if d_k.shape != (p_k1.shape[1], p_k.shape[1]):
        raise ValueError(
            f"incompatible shapes: D {d_k.shape}, P_k {p_k.shape}, P_k+1 {p_k1.shape}"
        )
    return (p_k1 @ d_k @ p_k.T).tocsr()


# ── Partial measures ──────────────────────────────────────────────────────────

def _inside_fraction(sdf: ScalarField, a: np.ndarray, b: np.ndarray, fa: np.ndarray, fb: np.ndarray) -> np.ndarray:
    """
    Fraction s of each segment a -> b lying inside, for a inside (fa <= 0)
    and b outside (fb > 0). Analytic shapes are bisected; sampled fields
    interpolate linearly.
    """
    if sdf.shape is None:
        return fa / (fa - fb)
    lo, hi = np.zeros(len(a)), np.ones(len(a))
    step = b - a
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        inside = sdf.shape.sdf(a + mid[:, None] * step) <= 0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return 0.5 * (lo + hi)


def _segment_fractions(sdf: ScalarField, pos: np.ndarray, f: np.ndarray, pairs) -> np.ndarray:
    """
    For every cell (rows of pos/f) and every corner pair (i, j), the inside
    fraction measured from whichever corner is inside. NaN where the pair
    does not cross the boundary.
    """
    n = len(f)
    out = np.full((n, len(pairs)), np.nan)
    for e, (i, j) in enumerate(pairs):
        ins_i, ins_j = f[:, i] <= 0, f[:, j] <= 0
        cross = ins_i != ins_j
        if not np.any(cross):
            continue
        first = ins_i[cross]
        pi, pj = pos[cross, i], pos[cross, j]
        fi, fj = f[cross, i], f[cross, j]
        a = np.where(first[:, None], pi, pj)
        b = np.where(first[:, None], pj, pi)
        fa = np.where(first, fi, fj)
        fb = np.where(first, fj, fi)
        out[cross, e] = _inside_fraction(sdf, a, b, fa, fb)
    return out


def _crossing(local: np.ndarray, inside: np.ndarray, i: int, j: int, s: float) -> np.ndarray:
    src, dst = (i, j) if inside[i] else (j, i)
    return local[src] + s * (local[dst] - local[src])


def _polygon_area(points: list[np.ndarray]) -> float:
    if len(points) < 3:
        return 0.0
    x = np.array([p[0] for p in points])
    y = np.array([p[1] for p in points])
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _face_area(f: np.ndarray, s: np.ndarray) -> float:
    """Inside area of one unit square face (marching squares)."""
    inside = f <= 0
    edges = [(_SQUARE_CYCLE[e], _SQUARE_CYCLE[(e + 1) % 4]) for e in range(4)]
    crossing = {edge: s[e] for e, edge in enumerate(edges)}

    diagonal = inside.sum() == 2 and inside[0] == inside[3]
    if diagonal and f.mean() > 0:
        # saddle resolved as two separate corners
        area = 0.0
        for c in np.flatnonzero(inside):
            touching = [edge for edge in edges if c in edge]
            p1, p2 = (_crossing(_SQUARE_LOCAL, inside, *edge, crossing[edge]) for edge in touching)
            u, v = p1 - _SQUARE_LOCAL[c], p2 - _SQUARE_LOCAL[c]
            area += 0.5 * abs(u[0] * v[1] - u[1] * v[0])
        return area

    polygon = []
    for edge in edges:
        c0, c1 = edge
        if inside[c0]:
            polygon.append(_SQUARE_LOCAL[c0])
        if inside[c0] != inside[c1]:
            polygon.append(_crossing(_SQUARE_LOCAL, inside, c0, c1, crossing[edge]))
    return _polygon_area(polygon)


def _tet_volume(p0, p1, p2, p3) -> float:
    return abs(np.linalg.det(np.stack([p1 - p0, p2 - p0, p3 - p0]))) / 6.0


def _tet_inside_volume(local: np.ndarray, f: np.ndarray, s: np.ndarray) -> float:
    """Inside volume of one tetrahedron given corner values and edge fractions."""
    inside = f <= 0
    n_in = int(inside.sum())
    if n_in == 0:
        return 0.0
    full = _tet_volume(*local)
    if n_in == 4:
        return full

    def cut(i, j):
        return _crossing(local, inside, i, j, s[_TET_EDGES.index((min(i, j), max(i, j)))])

    ins = [i for i in range(4) if inside[i]]
    outs = [i for i in range(4) if not inside[i]]
    if n_in == 1:
        a = ins[0]
        return _tet_volume(local[a], *(cut(a, o) for o in outs))
    if n_in == 3:
        o = outs[0]
        return full - _tet_volume(local[o], *(cut(o, i) for i in ins))

    a, b = ins
    c, d = outs
    P, Q, R, S = cut(a, c), cut(a, d), cut(b, c), cut(b, d)
    return (
        _tet_volume(local[a], P, Q, S)
        + _tet_volume(local[a], P, R, S)
        + _tet_volume(local[a], local[b], R, S)
    )


def partial_measures(sdf: ScalarField, k: int, indices: Optional[np.ndarray] = None) -> np.ndarray:
    """Inside measure of each listed k-cell (all k-cells if indices is None)."""
    grid = sdf.grid
    verts = grid.cell_vertices(k)
    if indices is not None:
        verts = verts[np.asarray(indices, dtype=np.int64)]
    f = sdf.values[verts]
    if k == 0:
        return np.ones(len(verts))

    full = grid.l_g**k
    inside = f <= 0
    out = np.where(inside.all(axis=1), full, 0.0)
    partial = inside.any(axis=1) & ~inside.all(axis=1)
    if not np.any(partial):
        return out

    pos = grid.vertex_positions()[verts[partial]]
    fp = f[partial]

    if k == 1:
        s = _segment_fractions(sdf, pos, fp, [(0, 1)])[:, 0]
        out[partial] = full * s
    elif k == 2:
        pairs = [(_SQUARE_CYCLE[e], _SQUARE_CYCLE[(e + 1) % 4]) for e in range(4)]
        s = _segment_fractions(sdf, pos, fp, pairs)
        out[partial] = [full * _face_area(fp[i], s[i]) for i in range(len(fp))]
    elif k == 3:
        pairs = [(tet[i], tet[j]) for tet in _KUHN_TETS for i, j in _TET_EDGES]
        s = _segment_fractions(sdf, pos, fp, pairs).reshape(len(fp), len(_KUHN_TETS), len(_TET_EDGES))
        volumes = []
        for i in range(len(fp)):
            total = 0.0
            for t, tet in enumerate(_KUHN_TETS):
                corners = list(tet)
                total += _tet_inside_volume(_CUBE_LOCAL[corners], fp[i, corners], s[i, t])
            volumes.append(total)
        out[partial] = full * np.asarray(volumes)
    else:
        raise ValueError(f"partial measures are defined for k <= 3, got {k}")

    return np.clip(out, 0.0, full)


def partial_measure(cell: CellId, sdf: ScalarField) -> float:
    grid = sdf.grid
    index = grid.cell_index(cell)
    if not classify_cells(grid, sdf, cell.k).included[index]:
        raise CellNotIncludedError(f"cell {cell} has no vertex inside the domain")
    return float(partial_measures(sdf, cell.k, np.array([index]))[0])


# ── Hodge stars ───────────────────────────────────────────────────────────────

def _check_eps(grid: GridComplex, eps: Optional[float]) -> float:
    if eps is None:
        eps = get_settings().eps_ratio * grid.l_g
    if not 0 < eps < grid.l_g:
        raise ValueError(f"eps must lie in (0, l_g={grid.l_g}), got {eps}")
    return eps


def hodge_star(
    grid: GridComplex,
    sdf: ScalarField,
    k: int,
    bc: Literal["normal", "tangential"] = "normal",
    eps: Optional[float] = None,
    mask: Optional[InclusionMask] = None,
) -> DiagonalStar:
    """
    S_k(i) = l_g^(dim-k) / max(partial measure of cell i, eps^k).

    Tangential stars are the reciprocals of the normal stars of degree
    dim-k built on the half-shifted field; their entries follow the dual
    grid's cell order.
    """
    if not 0 <= k <= grid.dim:
        raise ValueError(f"k must lie in [0, {grid.dim}], got {k}")
    eps = _check_eps(grid, eps)

    if bc == "tangential":
        shifted = dual_shift_field(sdf, grid)
        normal = hodge_star(shifted.grid, shifted, grid.dim - k, "normal", eps)
        return DiagonalStar(k, "tangential", 1.0 / normal.diag)
    if bc != "normal":
        raise ValueError(f"unknown boundary condition '{bc}'")

    mask = mask or classify_cells(grid, sdf, k)
    if k == 0:
        primal = np.ones(mask.count)
    else:
        primal = partial_measures(sdf, k, mask.indices)
        clamped = int(np.count_nonzero(primal < eps**k))
        if clamped:
            logger.debug("S_%d: %d of %d entries clamped at eps^%d", k, clamped, mask.count, k)
        primal = np.maximum(primal, eps**k)
    return DiagonalStar(k, "normal", grid.l_g ** (grid.dim - k) / primal)
