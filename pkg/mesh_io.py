"""
Plain-text mesh and cochain files.

  OFF        standard Object File Format (vertices + polygon faces)
  edge list  one "u v" pair per line, '#' starts a comment
  cochain    one value per line in cell order, '#' lines are headers
"""

import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from simplicial import Complex, PolygonComplex, SimplicialComplex

logger = logging.getLogger("gridhodge.mesh_io")

PathLike = Union[str, Path]


class MeshFormatError(ValueError):
    """A mesh, graph or cochain file does not parse."""


def _data_lines(path: PathLike) -> list[str]:
    lines = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    return lines


# ── OFF ───────────────────────────────────────────────────────────────────────

def read_off(path: PathLike) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    lines = _data_lines(path)
    if not lines or not lines[0].startswith("OFF"):
        raise MeshFormatError(f"{path}: missing OFF header")
    inline = lines[0][3:].split()
    try:
        head = inline or lines[1].split()
        body = lines[1:] if inline else lines[2:]
        n_vertices, n_faces = int(head[0]), int(head[1])
        vertices = np.array([[float(x) for x in body[i].split()[:3]] for i in range(n_vertices)])
        faces = []
        for line in body[n_vertices:n_vertices + n_faces]:
            tokens = [int(t) for t in line.split()]
            faces.append(tuple(tokens[1:1 + tokens[0]]))
    except (IndexError, ValueError) as e:
        raise MeshFormatError(f"{path}: {e}") from e
    if len(faces) != n_faces:
        raise MeshFormatError(f"{path}: expected {n_faces} faces, found {len(faces)}")
    return vertices, faces


def write_off(path: PathLike, vertices: np.ndarray, faces: Sequence[Sequence[int]]) -> None:
    vertices = np.asarray(vertices, dtype=float)
    if vertices.shape[1] == 2:
        vertices = np.hstack([vertices, np.zeros((len(vertices), 1))])
    lines = ["OFF", f"{len(vertices)} {len(faces)} 0"]
    lines += [" ".join(format(x, ".17g") for x in v) for v in vertices]
    lines += [" ".join(str(i) for i in (len(f), *f)) for f in faces]
    Path(path).write_text("\n".join(lines) + "\n")


def complex_from_faces(vertices: np.ndarray, faces: Sequence[Sequence[int]]) -> Complex:
    """Triangle-only meshes become simplicial complexes, anything else a polygon complex."""
    if all(len(f) == 3 for f in faces):
        return SimplicialComplex.from_simplices(faces, vertices=vertices)
    return PolygonComplex(n_vertices=len(vertices), faces=[tuple(f) for f in faces], vertices=vertices)


def load_mesh(path: PathLike) -> Complex:
    vertices, faces = read_off(path)
    logger.info("read %s: %d vertices, %d faces", path, len(vertices), len(faces))
    return complex_from_faces(vertices, faces)


# ── Graphs ────────────────────────────────────────────────────────────────────

def read_edge_list(path: PathLike) -> list[tuple[int, int]]:
    edges = []
    for line in _data_lines(path):
        tokens = line.split()
        if len(tokens) != 2:
            raise MeshFormatError(f"{path}: expected 'u v', got '{line}'")
        try:
            edges.append((int(tokens[0]), int(tokens[1])))
        except ValueError as e:
            raise MeshFormatError(f"{path}: {e}") from e
    return edges


def write_edge_list(path: PathLike, edges: Iterable[Sequence[int]]) -> None:
    Path(path).write_text("".join(f"{u} {v}\n" for u, v in edges))


# ── Cochains ──────────────────────────────────────────────────────────────────

def read_cochain(path: PathLike, expected: Optional[int] = None) -> np.ndarray:
    try:
        values = np.array([float(line) for line in _data_lines(path)])
    except ValueError as e:
        raise MeshFormatError(f"{path}: {e}") from e
    if expected is not None and len(values) != expected:
        raise MeshFormatError(f"{path}: expected {expected} values, found {len(values)}")
    if not np.all(np.isfinite(values)):
        raise MeshFormatError(f"{path}: non-finite values")
    return values


def write_cochain(path: PathLike, values: np.ndarray, header: Optional[str] = None) -> None:
    lines = [f"# {header}"] if header else []
    lines += [format(v, ".17g") for v in np.asarray(values, dtype=float)]
    Path(path).write_text("\n".join(lines) + "\n")
