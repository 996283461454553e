"""
Pure command implementations behind the CLI and the HTTP router.
No argument parsing and no file writes here; every entry point takes a
validated RunConfig and returns plain result objects.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from eigensolver import KernelEstimate, group_multiplicities, kernel_dimension
from exact_spectra import ball_spectrum, box_spectrum, disk_spectrum, shell_spectrum
from grid_complex import GridComplex, build_grid
from hodge_decomposition import (
    DecChain,
    DiscreteForm,
    HodgeComponents,
    component_report,
    decompose,
    graph_harmonic_field,
)
from laplacian_assembly import assemble_operators, big_laplacian, build_system, hodge_laplacian
from mesh_io import load_mesh, read_cochain, read_edge_list
from settings import get_settings
from shapes_sdf import ScalarField, Shape, load_sdf, sample_sdf, shape_from_dict
from simplicial import betti_numbers, clique_complex

logger = logging.getLogger("gridhodge.service")

# Eigenvalues requested per Laplacian when reading Betti numbers off kernels
BETTI_PROBE = 6

_SHAPE_DIMENSIONS = ("R", "a", "sides", "R_major", "r_minor", "r_outer", "r_inner", "center")


# ======================== CONFIG ========================

class RunConfig(BaseModel):
    command: Literal["spectra", "convergence", "betti", "decompose", "exact"] = "spectra"

    shape: Literal["disk", "square", "ball", "cube", "cuboid", "torus", "spherical_shell"] = "disk"
    R: Optional[float] = Field(None, gt=0)
    a: Optional[float] = Field(None, gt=0)
    sides: Optional[tuple[float, ...]] = None
    R_major: Optional[float] = Field(None, gt=0)
    r_minor: Optional[float] = Field(None, gt=0)
    r_outer: Optional[float] = Field(None, gt=0)
    r_inner: Optional[float] = Field(None, gt=0)
    center: Optional[tuple[float, ...]] = None

    lg: float = Field(0.1, gt=0, description="Grid length l_g")
    lg_list: list[float] = Field(default_factory=list, description="Grid lengths of a convergence sweep")
    grid: Literal["auto", "fig-example"] = "auto"
    padding: int = Field(1, ge=0, le=8)

    k: int = Field(0, ge=0, le=3)
    bc: Literal["normal", "tangential"] = "normal"
    kind: Literal["big", "hodge", "combinatorial"] = "hodge"
    m: Optional[int] = Field(None, ge=0)
    eps: Optional[float] = Field(None, gt=0)
    seed: int = 0

    field: Literal["random", "gradient", "graph-harmonic", "file"] = "random"
    field_file: Optional[str] = None
    sdf_file: Optional[str] = None
    mesh: Optional[str] = None
    graph: Optional[str] = None

    @model_validator(mode="after")
    def _check_inputs(self):
        if any(lg <= 0 for lg in self.lg_list):
            raise ValueError("every grid length in lg_list must be positive")
        if self.field == "file" and not self.field_file:
            raise ValueError("field 'file' needs field_file")
        if self.mesh and self.graph:
            raise ValueError("give either mesh or graph, not both")
        if self.eps is not None and self.eps >= self.lg:
            raise ValueError(f"eps must lie in (0, lg), got eps={self.eps} for lg={self.lg}")
        return self

    def eigen_count(self) -> int:
        return get_settings().default_m if self.m is None else self.m


def build_shape(config: RunConfig) -> Shape:
    dims = {name: getattr(config, name) for name in _SHAPE_DIMENSIONS if getattr(config, name) is not None}
    return shape_from_dict({"kind": config.shape, **dims})


def grid_for(config: RunConfig, shape: Shape, l_g: Optional[float] = None) -> GridComplex:
    """
    'auto' covers the shape's bounding box with `padding` extra layers;
    'fig-example' is the unpadded 3 x 3-cell grid centred on the shape.
    """
    l_g = config.lg if l_g is None else l_g
    if config.grid == "fig-example":
        c = shape.origin()
        return build_grid((c - 1.5 * l_g, c + 1.5 * l_g), l_g, shape.dim, padding=0)
    return build_grid(shape.bbox(), l_g, shape.dim, padding=config.padding)


def field_for(config: RunConfig, l_g: Optional[float] = None) -> ScalarField:
    if config.sdf_file:
        field = load_sdf(config.sdf_file)
        logger.info("loaded SDF %s on grid %s", config.sdf_file, field.grid.shape)
        return field
    shape = build_shape(config)
    return sample_sdf(shape, grid_for(config, shape, l_g))


# ======================== SPECTRA ========================

@dataclass(frozen=True)
class SpectraRun:
    l_g: float
    eigenvalues: np.ndarray  # scaled
    groups: np.ndarray
    kernel_dim: int
    indeterminate: bool
    size: int
    method: str


def _solve(config: RunConfig, field: ScalarField) -> SpectraRun:
    grid = field.grid
    system = build_system(grid, field, config.k, config.bc, config.kind, config.eps)
    m = config.eigen_count()
    if m > system.size:
        logger.warning("⚠️ only %d cells carry %d-forms; returning all of them", system.size, config.k)
        m = system.size
    result = system.eigenpairs(m, return_vectors=False)
    values = result.scaled
    kernel = kernel_dimension(result) if len(values) else KernelEstimate(0, False, 0.0)
    return SpectraRun(
        l_g=grid.l_g,
        eigenvalues=values,
        groups=group_multiplicities(values),
        kernel_dim=kernel.dim,
        indeterminate=kernel.indeterminate,
        size=system.size,
        method=result.method,
    )


def run_spectra(config: RunConfig) -> SpectraRun:
    run = _solve(config, field_for(config))
    logger.info("✅ %s L_%d,%s: %d values, kernel %d", config.kind, config.k, config.bc[0], len(run.eigenvalues), run.kernel_dim)
    return run


def run_convergence(config: RunConfig) -> tuple[list[SpectraRun], Optional[np.ndarray]]:
    """One solve per grid length, finest last; plus the exact spectrum when one is known."""
    if config.sdf_file:
        raise ValueError("a convergence sweep resamples the shape and cannot use a stored SDF")
    lgs = sorted(set(config.lg_list or [config.lg]), reverse=True)
    threads = get_settings().threads

    def solve_one(l_g: float) -> SpectraRun:
        logger.info("sweep: l_g=%g", l_g)
        return _solve(config, field_for(config, l_g))

    with ThreadPoolExecutor(max_workers=threads) as pool:
        runs = list(pool.map(solve_one, lgs))
    runs.sort(key=lambda run: -run.l_g)
    return runs, exact_reference(config)


# ======================== EXACT ========================

def exact_reference(config: RunConfig, m: Optional[int] = None) -> Optional[np.ndarray]:
    """
    Closed-form spectrum matching (shape, k, bc, kind), or None.

    L_0 carries the scalar spectrum of its own boundary condition; L_dim
    carries the scalar spectrum of the opposite one. Combinatorial
    systems are unscaled and have no continuous counterpart.
    """
    if config.kind == "combinatorial" or config.sdf_file:
        return None
    shape = build_shape(config)
    if config.k == 0:
        dirichlet = config.bc == "normal"
    elif config.k == shape.dim:
        dirichlet = config.bc == "tangential"
    else:
        return None
    return _scalar_spectrum(shape, dirichlet, config.eigen_count() if m is None else m)


def _scalar_spectrum(shape: Shape, dirichlet: bool, m: int) -> Optional[np.ndarray]:
    bc = "dirichlet" if dirichlet else "neumann"
    if shape.kind == "disk":
        return disk_spectrum(shape.R, dirichlet=dirichlet, m=m)
    if shape.kind in ("square", "cube"):
        return box_spectrum(shape.a, bc, m, dim=shape.dim)
    if shape.kind == "cuboid":
        return box_spectrum(shape.sides, bc, m)
    if shape.kind == "ball":
        return ball_spectrum(shape.R, bc, m)
    if shape.kind == "spherical_shell":
        return shell_spectrum(shape.r_outer, shape.r_inner, bc, m)
    return None


def run_exact(config: RunConfig) -> np.ndarray:
    shape = build_shape(config)
    values = _scalar_spectrum(shape, config.bc == "normal", config.eigen_count())
    if values is None:
        raise ValueError(f"no closed-form spectrum for shape '{shape.kind}'")
    return values


# ======================== BETTI ========================

@dataclass(frozen=True)
class BettiRun:
    betti: list[int]
    indeterminate: list[bool]
    source: str


def run_betti(config: RunConfig) -> BettiRun:
    """
    Betti numbers of a mesh, of the clique complex of a graph, or of a
    gridded shape. On a grid, β_j is the kernel dimension of L_{dim-j}
    under the normal boundary condition.
    """
    if config.mesh:
        cx = load_mesh(config.mesh)
        betti = list(betti_numbers(cx))
        return BettiRun(betti, [False] * len(betti), "mesh")
    if config.graph:
        cx = clique_complex(read_edge_list(config.graph))
        betti = list(betti_numbers(cx))
        return BettiRun(betti, [False] * len(betti), "graph")

    field = field_for(config)
    grid = field.grid
    ops = assemble_operators(grid, field, "normal", config.eps, with_stars=config.kind == "hodge")
    betti, flags = [], []
    for j in range(grid.dim):
        k = grid.dim - j
        if config.kind == "hodge":
            system = hodge_laplacian(grid, field, k, "normal", config.eps, operators=ops)
        else:
            system = big_laplacian(grid, field, k, "normal", operators=ops)
        if system.size == 0:
            betti.append(0)
            flags.append(False)
            continue
        result = system.eigenpairs(min(BETTI_PROBE, system.size), return_vectors=False)
        estimate = kernel_dimension(result)
        betti.append(estimate.dim)
        flags.append(estimate.indeterminate)
        logger.info("ker L_%d,n = %d%s", k, estimate.dim, " (indeterminate)" if estimate.indeterminate else "")
    return BettiRun(betti, flags, "grid")


# ======================== DECOMPOSITION ========================

@dataclass(frozen=True)
class DecomposeRun:
    form: DiscreteForm
    parts: HodgeComponents
    report: dict


def _input_form(config: RunConfig, chain: DecChain) -> DiscreteForm:
    rng = np.random.default_rng(config.seed)
    n_edges, n_vertices = chain.d0.shape
    if config.field == "file":
        return DiscreteForm(1, read_cochain(config.field_file, expected=n_edges))
    if config.field == "gradient":
        return DiscreteForm(1, chain.d0 @ rng.standard_normal(n_vertices))
    values = rng.standard_normal(n_edges)
    if config.field == "graph-harmonic":
        values = graph_harmonic_field(chain, values)
    return DiscreteForm(1, values)


def run_decompose(config: RunConfig) -> DecomposeRun:
    field = field_for(config)
    chain = DecChain.from_operators(assemble_operators(field.grid, field, config.bc, config.eps))
    form = _input_form(config, chain)
    parts = decompose(form, chain)
    report = component_report(form, parts, chain)
    logger.info(
        "✅ decomposition: exact %.4g coexact %.4g harmonic %.4g",
        report["exact"], report["coexact"], report["harmonic"],
    )
    return DecomposeRun(form, parts, report)
