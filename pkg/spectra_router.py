from fastapi import APIRouter, HTTPException
from pydantic import BaseModel

import spectra_service
from eigensolver import group_multiplicities
from settings import get_settings
from spectra_service import RunConfig

spectra_router = APIRouter(prefix="/api/spectra")

# Shape kinds and the dimensions each one needs
SHAPES = {
    "disk": ["R"],
    "square": ["a"],
    "ball": ["R"],
    "cube": ["a"],
    "cuboid": ["sides"],
    "torus": ["R_major", "r_minor"],
    "spherical_shell": ["r_outer", "r_inner"],
}


# ── Response models ────────────────────────────────────────────────────────────

class ShapeOut(BaseModel):
    kind: str
    dimensions: list[str]


class SpectraOut(BaseModel):
    l_g: float
    eigenvalues: list[float]
    multiplicity_groups: list[int]
    kernel_dim: int
    kernel_indeterminate: bool
    size: int
    method: str


class ExactOut(BaseModel):
    eigenvalues: list[float]
    multiplicity_groups: list[int]


class BettiOut(BaseModel):
    betti: list[int]
    indeterminate: list[bool]
    source: str


def _server_side(config: RunConfig, command: str) -> RunConfig:
    """Reject file inputs and grids above the HTTP size cap; only analytic shapes are served."""
    if config.sdf_file or config.mesh or config.graph or config.field_file:
        raise HTTPException(status_code=422, detail="file inputs are only accepted on the command line")
    config = config.model_copy(update={"command": command})
    if command != "exact":
        limit = get_settings().http_max_vertices
        grid = _call(lambda c: spectra_service.grid_for(c, spectra_service.build_shape(c)), config)
        vertices = grid.num_cells(0)
        if vertices > limit:
            raise HTTPException(
                status_code=422,
                detail=f"grid {grid.shape} has {vertices} vertices; HTTP requests are limited to {limit}",
            )
    return config


def _call(fn, config: RunConfig):
    try:
        return fn(config)
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except RuntimeError as e:
        raise HTTPException(status_code=500, detail=f"{type(e).__name__}: {e}")


# ── Endpoints ──────────────────────────────────────────────────────────────────

@spectra_router.get("/shapes", response_model=list[ShapeOut])
def list_shapes():
    return [ShapeOut(kind=kind, dimensions=dims) for kind, dims in SHAPES.items()]


@spectra_router.post("/eigenvalues", response_model=SpectraOut)
def eigenvalues(payload: RunConfig):
    run = _call(spectra_service.run_spectra, _server_side(payload, "spectra"))
    return SpectraOut(
        l_g=run.l_g,
        eigenvalues=run.eigenvalues.tolist(),
        multiplicity_groups=run.groups.tolist(),
        kernel_dim=run.kernel_dim,
        kernel_indeterminate=run.indeterminate,
        size=run.size,
        method=run.method,
    )


@spectra_router.post("/exact", response_model=ExactOut)
def exact(payload: RunConfig):
    values = _call(spectra_service.run_exact, _server_side(payload, "exact"))
    return ExactOut(eigenvalues=values.tolist(), multiplicity_groups=group_multiplicities(values).tolist())


@spectra_router.post("/betti", response_model=BettiOut)
def betti(payload: RunConfig):
    run = _call(spectra_service.run_betti, _server_side(payload, "betti"))
    return BettiOut(betti=run.betti, indeterminate=run.indeterminate, source=run.source)
