"""
Signed distance functions for the analytic test shapes, scalar fields
sampled on grid vertices, and the SDF file formats.

Sign convention: negative inside, zero on the boundary, positive outside.

File format (text):
    SDF <dim> <nx> <ny> [<nz>] <ox> <oy> [<oz>] <l_g>
    one value per line, x-fastest
The binary variant starts with the same header under the magic SDFB and
stores the values as little-endian float64 right after the newline.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator

from grid_complex import GridComplex

logger = logging.getLogger("gridhodge.sdf")


class SdfFormatError(ValueError):
    """An SDF file is malformed or inconsistent with its header."""


# ======================== SHAPES ========================

def _box_sdf(p: np.ndarray, half: np.ndarray) -> np.ndarray:
    q = np.abs(p) - half
    outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
    inside = np.minimum(np.max(q, axis=-1), 0.0)
    return outside + inside


class _Shape(BaseModel):
    model_config = ConfigDict(frozen=True)

    center: Optional[tuple[float, ...]] = None

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @model_validator(mode="after")
    def _center_matches_dim(self):
        if self.center is not None and len(self.center) != self.dim:
            raise ValueError(f"center needs {self.dim} coordinates, got {len(self.center)}")
        return self

    def origin(self) -> np.ndarray:
        return np.zeros(self.dim) if self.center is None else np.asarray(self.center, dtype=float)

    def _local(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        if p.shape[-1] != self.dim:
            raise ValueError(f"{self.kind} expects {self.dim}-D points, got trailing size {p.shape[-1]}")
        return p - self.origin()

    def sdf(self, points) -> np.ndarray:
        raise NotImplementedError

    def half_extent(self) -> np.ndarray:
        raise NotImplementedError

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        c, h = self.origin(), self.half_extent()
        return c - h, c + h


class Disk(_Shape):
    kind: Literal["disk"] = "disk"
    R: float = Field(..., gt=0)

    @property
    def dim(self) -> int:
        return 2

    def sdf(self, points):
        return np.linalg.norm(self._local(points), axis=-1) - self.R

    def half_extent(self):
        return np.full(2, self.R)


class Square(_Shape):
    kind: Literal["square"] = "square"
    a: float = Field(..., gt=0, description="Side length")

    @property
    def dim(self) -> int:
        return 2

    def sdf(self, points):
        return _box_sdf(self._local(points), np.full(2, self.a / 2))

    def half_extent(self):
        return np.full(2, self.a / 2)


class Ball(_Shape):
    kind: Literal["ball"] = "ball"
    R: float = Field(..., gt=0)

    @property
    def dim(self) -> int:
        return 3

    def sdf(self, points):
        return np.linalg.norm(self._local(points), axis=-1) - self.R

    def half_extent(self):
        return np.full(3, self.R)


class Cube(_Shape):
    kind: Literal["cube"] = "cube"
    a: float = Field(..., gt=0, description="Side length")

    @property
    def dim(self) -> int:
        return 3

    def sdf(self, points):
        return _box_sdf(self._local(points), np.full(3, self.a / 2))

    def half_extent(self):
        return np.full(3, self.a / 2)


class Cuboid(_Shape):
    """Axis-aligned rectangle (two sides) or box (three sides)."""

    kind: Literal["cuboid"] = "cuboid"
    sides: tuple[float, ...] = Field(..., min_length=2, max_length=3)

    @model_validator(mode="after")
    def _positive_sides(self):
        if any(s <= 0 for s in self.sides):
            raise ValueError(f"cuboid sides must be positive, got {self.sides}")
        return self

    @property
    def dim(self) -> int:
        return len(self.sides)

    def sdf(self, points):
        return _box_sdf(self._local(points), np.asarray(self.sides) / 2)

    def half_extent(self):
        return np.asarray(self.sides, dtype=float) / 2


class Torus(_Shape):
    """Solid torus around the z axis."""

    kind: Literal["torus"] = "torus"
    R_major: float = Field(..., gt=0)
    r_minor: float = Field(..., gt=0)

    @model_validator(mode="after")
    def _minor_below_major(self):
        if self.r_minor >= self.R_major:
            raise ValueError("torus needs r_minor < R_major")
        return self

    @property
    def dim(self) -> int:
        return 3

    def sdf(self, points):
        p = self._local(points)
        ring = np.hypot(p[..., 0], p[..., 1]) - self.R_major
        return np.hypot(ring, p[..., 2]) - self.r_minor

    def half_extent(self):
        reach = self.R_major + self.r_minor
        return np.array([reach, reach, self.r_minor])


class SphericalShell(_Shape):
    kind: Literal["spherical_shell"] = "spherical_shell"
    r_outer: float = Field(..., gt=0)
    r_inner: float = Field(..., gt=0)

    @model_validator(mode="after")
    def _inner_below_outer(self):
        if self.r_inner >= self.r_outer:
            raise ValueError("spherical shell needs r_inner < r_outer")
        return self

    @property
    def dim(self) -> int:
        return 3

    def sdf(self, points):
        r = np.linalg.norm(self._local(points), axis=-1)
        return np.maximum(r - self.r_outer, self.r_inner - r)

    def half_extent(self):
        return np.full(3, self.r_outer)


Shape = Annotated[
    Union[Disk, Square, Ball, Cube, Cuboid, Torus, SphericalShell],
    Field(discriminator="kind"),
]

_shape_adapter = TypeAdapter(Shape)


def shape_from_dict(data: dict) -> Shape:
    """Validate a {'kind': ..., ...} mapping into a shape model."""
    return _shape_adapter.validate_python(data)


def sdf_eval(shape: Shape, point) -> float:
    p = np.asarray(point, dtype=float)
    if p.shape != (shape.dim,):
        raise ValueError(f"point must have {shape.dim} coordinates, got shape {p.shape}")
    return float(shape.sdf(p[None, :])[0])


# ======================== SAMPLED FIELDS ========================

@dataclass(frozen=True)
class ScalarField:
    """SDF values at the vertices of a grid, optionally tied to the shape they came from."""

    grid: GridComplex
    values: np.ndarray
    shape: Optional[Shape] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or len(values) != self.grid.num_cells(0):
            raise ValueError(f"expected {self.grid.num_cells(0)} vertex values, got array of shape {values.shape}")
        object.__setattr__(self, "values", values)

    def inside(self) -> np.ndarray:
        return self.values < 0


def sample_sdf(shape: Shape, grid: GridComplex) -> ScalarField:
    if shape.dim != grid.dim:
        raise ValueError(f"{shape.kind} is {shape.dim}-D but the grid is {grid.dim}-D")
    return ScalarField(grid=grid, values=shape.sdf(grid.vertex_positions()), shape=shape)


# ======================== FILE FORMAT ========================

_TEXT_MAGIC = b"SDF"
_BINARY_MAGIC = b"SDFB"


def _header(grid: GridComplex, magic: bytes) -> bytes:
    tokens = [magic.decode(), str(grid.dim)]
    tokens += [str(n) for n in grid.shape]
    tokens += [format(o, ".17g") for o in grid.origin]
    tokens.append(format(grid.l_g, ".17g"))
    return (" ".join(tokens) + "\n").encode()


def save_sdf(field: ScalarField, path: Union[str, Path], binary: bool = False) -> None:
    path = Path(path)
    if binary:
        body = field.values.astype("<f8").tobytes()
        path.write_bytes(_header(field.grid, _BINARY_MAGIC) + body)
    else:
        lines = "\n".join(format(v, ".17g") for v in field.values)
        path.write_bytes(_header(field.grid, _TEXT_MAGIC) + lines.encode() + b"\n")


def load_sdf(path: Union[str, Path]) -> ScalarField:
    raw = Path(path).read_bytes()
    head, sep, body = raw.partition(b"\n")
    if not sep:
        raise SdfFormatError(f"{path}: missing header line")

    tokens = head.split()
    if not tokens or tokens[0] not in (_TEXT_MAGIC, _BINARY_MAGIC):
        raise SdfFormatError(f"{path}: header must start with SDF or SDFB")
    try:
        dim = int(tokens[1])
    except (IndexError, ValueError) as e:
        raise SdfFormatError(f"{path}: unreadable dimension in header") from e
    if dim not in (2, 3) or len(tokens) != 2 + 2 * dim + 1:
        raise SdfFormatError(f"{path}: header has {len(tokens)} tokens for dim={dim}")
    try:
        shape = tuple(int(t) for t in tokens[2:2 + dim])
        origin = tuple(float(t) for t in tokens[2 + dim:2 + 2 * dim])
        l_g = float(tokens[-1])
    except ValueError as e:
        raise SdfFormatError(f"{path}: unreadable header: {e}") from e

    if any(n < 1 for n in shape) or not (l_g > 0 and math.isfinite(l_g)):
        raise SdfFormatError(f"{path}: invalid grid in header")
    grid = GridComplex(dim=dim, origin=origin, l_g=l_g, shape=shape)
    expected = grid.num_cells(0)

    if tokens[0] == _BINARY_MAGIC:
        if len(body) != 8 * expected:
            raise SdfFormatError(f"{path}: expected {8 * expected} bytes of values, found {len(body)}")
        values = np.frombuffer(body, dtype="<f8").astype(float)
    else:
        try:
            values = np.array(body.decode("ascii").split(), dtype=float)
        except (UnicodeDecodeError, ValueError) as e:
            raise SdfFormatError(f"{path}: non-numeric value: {e}") from e
        if len(values) != expected:
            raise SdfFormatError(f"{path}: header promises {expected} values, found {len(values)}")

    if not np.all(np.isfinite(values)):
        raise SdfFormatError(f"{path}: non-finite SDF values")
    logger.debug("loaded SDF %s with %d values", path, expected)
    return ScalarField(grid=grid, values=values)
