"""
Assembly of grid Laplacians under normal and tangential boundary
conditions.

    BIG / combinatorial:  L_k = D_k^T D_k + D_{k-1} D_{k-1}^T
    Hodge:                L_k = D_k^T S_{k+1} D_k + S_k D_{k-1} S_{k-1}^-1 D_{k-1}^T S_k
                          solved against the mass S_k

Tangential systems are normal systems of the complementary degree built
on the half-shifted field, with transposed coboundaries and reciprocal
stars.
"""

import logging
from dataclasses import dataclass
from typing import Literal, NamedTuple, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from boundary_ops import (
    DiagonalStar,
    InclusionMask,
    classify_cells,
    hodge_star,
    projection_matrix,
    restricted_coboundary,
)
from eigensolver import SpectrumResult, smallest_eigenpairs
from grid_complex import GridComplex, coboundary, dual_shift_field
from shapes_sdf import ScalarField, Shape, sample_sdf

logger = logging.getLogger("gridhodge.assembly")

BoundaryCondition = Literal["normal", "tangential"]
LaplacianKind = Literal["big", "hodge", "combinatorial"]

NTC_REL_TOL = 1e-6


class NtcInconsistencyError(ValueError):
    """A scalar eigenvalue could not be found in the vector spectrum."""

    def __init__(self, message: str, value: float):
        super().__init__(message)
        self.value = value


# ── Operator chain ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class DecOperators:
    """
    The restricted DEC chain of one boundary condition.

    coboundaries[k] maps k-forms to (k+1)-forms; masks[k] selects the grid
    cells carrying k-forms (dual-grid cells of dimension dim-k for the
    tangential chain); stars is None when only BIG systems are needed.
    """

    dim: int
    bc: str
    l_g: float
    grid: GridComplex
    masks: tuple[InclusionMask, ...]
    coboundaries: tuple[sp.csr_matrix, ...]
    stars: Optional[tuple[DiagonalStar, ...]]

    def size(self, k: int) -> int:
        return self.masks[k].count


def _check_k(dim: int, k: int) -> None:
    if not 0 <= k <= dim:
        raise ValueError(f"k must lie in [0, {dim}], got {k}")


def assemble_operators(
    grid: GridComplex,
    sdf: ScalarField,
    bc: BoundaryCondition = "normal",
    eps: Optional[float] = None,
    with_stars: bool = True,
) -> DecOperators:
    dim = grid.dim
    if bc == "normal":
        masks = tuple(classify_cells(grid, sdf, k) for k in range(dim + 1))
        proj = [projection_matrix(mask) for mask in masks]
        d = tuple(restricted_coboundary(coboundary(grid, k), proj[k], proj[k + 1]) for k in range(dim))
        stars = None
        if with_stars:
            stars = tuple(hodge_star(grid, sdf, k, "normal", eps, masks[k]) for k in range(dim + 1))
        logger.info("normal chain on %s: cells %s", grid.shape, [m.count for m in masks])
        return DecOperators(dim, "normal", grid.l_g, grid, masks, d, stars)

    if bc == "tangential":
        shifted = dual_shift_field(sdf, grid)
        normal = assemble_operators(shifted.grid, shifted, "normal", eps, with_stars)
        d = tuple(normal.coboundaries[dim - 1 - k].T.tocsr() for k in range(dim))
        masks = tuple(normal.masks[dim - k] for k in range(dim + 1))
        stars = None
        if with_stars:
            stars = tuple(DiagonalStar(k, "tangential", 1.0 / normal.stars[dim - k].diag) for k in range(dim + 1))
        return DecOperators(dim, "tangential", grid.l_g, shifted.grid, masks, d, stars)

    raise ValueError(f"unknown boundary condition '{bc}'")


# ── Systems ───────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class LaplacianSystem:
    k: int
    bc: str
    kind: str
    stiffness: sp.csr_matrix
    mass: Optional[DiagonalStar]  # None stands for the identity
    scale: float = 1.0

    @property
    def size(self) -> int:
        return self.stiffness.shape[0]

    def mass_matrix(self) -> sp.csr_matrix:
        if self.mass is None:
            return sp.identity(self.size, format="csr")
        return self.mass.matrix()

    def eigenpairs(self, m: Optional[int] = None, **kwargs) -> SpectrumResult:
        """Smallest eigenpairs; eigenvalues are multiplied by scale in `.scaled`."""
        mass = None if self.mass is None else self.mass.diag
        return smallest_eigenpairs(self.stiffness, mass, m, scale=self.scale, **kwargs)


def _symmetrized(L: sp.spmatrix) -> sp.csr_matrix:
    return (0.5 * (L + L.T)).tocsr()


def _graph_stiffness(ops: DecOperators, k: int) -> sp.csr_matrix:
    n = ops.size(k)
    L = sp.csr_matrix((n, n))
    if k < ops.dim:
        d = ops.coboundaries[k]
        L = L + d.T @ d
    if k > 0:
        d = ops.coboundaries[k - 1]
        L = L + d @ d.T
    return _symmetrized(L)


def _hodge_stiffness(ops: DecOperators, k: int) -> sp.csr_matrix:
    n = ops.size(k)
    S = ops.stars
    L = sp.csr_matrix((n, n))
    if k < ops.dim:
        d = ops.coboundaries[k]
        L = L + d.T @ S[k + 1].matrix() @ d
    if k > 0:
        d = ops.coboundaries[k - 1]
        sk = S[k].matrix()
        L = L + sk @ d @ S[k - 1].inverse().matrix() @ d.T @ sk
    return _symmetrized(L)


def big_laplacian(
    grid: GridComplex,
    sdf: ScalarField,
    k: int,
    bc: BoundaryCondition = "normal",
    operators: Optional[DecOperators] = None,
) -> LaplacianSystem:
    _check_k(grid.dim, k)
    ops = operators or assemble_operators(grid, sdf, bc, with_stars=False)
    return LaplacianSystem(k, bc, "big", _graph_stiffness(ops, k), None, 1.0 / grid.l_g**2)


def combinatorial_grid_laplacian(
    grid: GridComplex,
    sdf: ScalarField,
    k: int,
    bc: BoundaryCondition = "normal",
    operators: Optional[DecOperators] = None,
) -> LaplacianSystem:
    _check_k(grid.dim, k)
    ops = operators or assemble_operators(grid, sdf, bc, with_stars=False)
    return LaplacianSystem(k, bc, "combinatorial", _graph_stiffness(ops, k), None, 1.0)


def hodge_laplacian(
    grid: GridComplex,
    sdf: ScalarField,
    k: int,
    bc: BoundaryCondition = "normal",
    eps: Optional[float] = None,
    operators: Optional[DecOperators] = None,
) -> LaplacianSystem:
    _check_k(grid.dim, k)
    ops = operators or assemble_operators(grid, sdf, bc, eps)
    if ops.stars is None:
        raise ValueError("Hodge systems need an operator chain assembled with stars")
    mass = ops.stars[k]
    if len(mass) != ops.size(k):
        raise ValueError(f"S_{k} has {len(mass)} entries for {ops.size(k)} cells")
    return LaplacianSystem(k, bc, "hodge", _hodge_stiffness(ops, k), mass, 1.0)


_BUILDERS = {
    "big": big_laplacian,
    "combinatorial": combinatorial_grid_laplacian,
    "hodge": hodge_laplacian,
}


def build_system(
    grid: GridComplex,
    sdf: ScalarField,
    k: int,
    bc: BoundaryCondition,
    kind: LaplacianKind,
    eps: Optional[float] = None,
) -> LaplacianSystem:
    if kind not in _BUILDERS:
        raise ValueError(f"unknown Laplacian kind '{kind}'")
    if kind == "hodge":
        return hodge_laplacian(grid, sdf, k, bc, eps)
    return _BUILDERS[kind](grid, sdf, k, bc)


def tangential_system(
    grid: GridComplex,
    source: Union[ScalarField, Shape],
    k: int,
    kind: LaplacianKind = "hodge",
    eps: Optional[float] = None,
) -> LaplacianSystem:
    """L_{k,t} from a shape (exact resampling) or a padded sampled field."""
    sdf = source if isinstance(source, ScalarField) else sample_sdf(source, grid)
    return build_system(grid, sdf, k, "tangential", kind, eps)


# ── N/T/C spectra ─────────────────────────────────────────────────────────────

class NtcSpectra(NamedTuple):
    N: np.ndarray
    T: np.ndarray
    C: np.ndarray
    zeros: dict  # zero counts per input spectrum, compared against Betti numbers


def _values(spectrum) -> np.ndarray:
    if isinstance(spectrum, SpectrumResult):
        return np.sort(spectrum.scaled)
    return np.sort(np.asarray(spectrum, dtype=float))


def _split_zeros(values: np.ndarray, zero_tol: float) -> tuple[int, np.ndarray]:
    if not len(values):
        return 0, values
    cut = zero_tol * float(np.max(np.abs(values)))
    zero = np.abs(values) <= cut
    return int(np.count_nonzero(zero)), values[~zero]


def ntc_split(
    n_spectrum: Union[SpectrumResult, Sequence[float]],
    t_spectrum: Union[SpectrumResult, Sequence[float]],
    vector_spectrum: Union[SpectrumResult, Sequence[float]],
    vector_bc: BoundaryCondition = "normal",
    rel_tol: float = NTC_REL_TOL,
    zero_tol: float = 1e-6,
) -> NtcSpectra:
    """
    Separate the normal-gradient (N), tangential-gradient (T) and curl (C)
    spectra.

    The vector Laplacian's nonzero spectrum is C plus the scalar spectrum
    of the matching boundary condition (N for normal, T for tangential).
    Scalar values up to the vector spectrum's largest computed value must
    each be found there within rel_tol; what is left is C. Vector values
    above the largest computed scalar value cannot be attributed and are
    dropped with a warning.
    """
    zeros = {}
    zeros["n"], N = _split_zeros(_values(n_spectrum), zero_tol)
    zeros["t"], T = _split_zeros(_values(t_spectrum), zero_tol)
    zeros["vector"], V = _split_zeros(_values(vector_spectrum), zero_tol)

    scalar = N if vector_bc == "normal" else T
    if not len(V):
        return NtcSpectra(N, T, np.zeros(0), zeros)

    top = V[-1]
    used = np.zeros(len(V), dtype=bool)
    for value in scalar:
        if value > top * (1 + rel_tol):
            break
        gap = np.abs(V - value)
        gap[used] = np.inf
        j = int(np.argmin(gap))
        if gap[j] <= rel_tol * abs(value):
            used[j] = True
        elif abs(value - top) <= rel_tol * abs(top):
            # a multiplet cut off at the end of the computed vector spectrum
            continue
        else:
            raise NtcInconsistencyError(
                f"scalar eigenvalue {value:.10g} has no counterpart in the vector spectrum", value
            )

    C = V[~used]
    if len(scalar) and len(C):
        limit = scalar[-1] * (1 + rel_tol)
        unresolved = C > limit
        if np.any(unresolved):
            logger.warning("⚠️ %d vector eigenvalues above %.6g left unattributed", int(unresolved.sum()), limit)
            C = C[~unresolved]
    return NtcSpectra(N, T, C, zeros)
