"""Meshes used by the fixtures: quad torus, split unit square, irregular square triangulation."""

import numpy as np
from scipy.spatial import Delaunay

from simplicial import PolygonComplex, SimplicialComplex


def quad_torus(n_major: int = 50, n_minor: int = 40, R: float = 1.0, r: float = 0.3) -> PolygonComplex:
    """Torus surface with n_major * n_minor quads; vertex (i, j) has id i * n_minor + j."""
    if n_major < 3 or n_minor < 3:
        raise ValueError("both ring sizes must be at least 3")
    u = 2 * np.pi * np.arange(n_major) / n_major
    v = 2 * np.pi * np.arange(n_minor) / n_minor
    uu, vv = np.meshgrid(u, v, indexing="ij")
    ring = R + r * np.cos(vv)
    vertices = np.stack([ring * np.cos(uu), ring * np.sin(uu), r * np.sin(vv)], axis=-1).reshape(-1, 3)

    def vid(i, j):
        return (i % n_major) * n_minor + (j % n_minor)

    faces = [
        (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1))
        for i in range(n_major)
        for j in range(n_minor)
    ]
    return PolygonComplex(n_vertices=n_major * n_minor, faces=faces, vertices=vertices)


def split_square() -> SimplicialComplex:
    """Unit square cut along the diagonal v0-v2; vertices run counter-clockwise from the origin."""
    vertices = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    return SimplicialComplex.from_simplices([(0, 1, 2), (0, 2, 3)], vertices=vertices)


def irregular_square_mesh(n_interior: int = 300, per_side: int = 12, seed: int = 0) -> SimplicialComplex:
    """
    Delaunay triangulation of the unit square with interior points crowded
    towards x = 0 (x = u**2 for uniform u) and evenly spaced boundary points.
    """
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.02, 1.0, size=n_interior)
    y = rng.uniform(0.02, 0.98, size=n_interior)
    interior = np.column_stack([np.clip(u**2, 0.01, 0.98), y])

    t = np.linspace(0.0, 1.0, per_side + 1)[:-1]
    boundary = np.concatenate([
        np.column_stack([t, np.zeros_like(t)]),
        np.column_stack([np.ones_like(t), t]),
        np.column_stack([1.0 - t, np.ones_like(t)]),
        np.column_stack([np.zeros_like(t), 1.0 - t]),
    ])
    points = np.vstack([boundary, interior])
    triangulation = Delaunay(points)
    return SimplicialComplex.from_simplices(triangulation.simplices, vertices=points)
