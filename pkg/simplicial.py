"""
Abstract complexes outside the grid setting.

SimplicialComplex covers clique complexes of graphs and triangle meshes;
PolygonComplex covers 2-complexes whose faces are vertex cycles (quad
meshes). Both expose boundary(k) = B_k, the signed incidence from
k-cells to (k-1)-cells, which is all the combinatorial Laplacian and the
Betti numbers need.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Literal, Optional, Sequence, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import sympy

logger = logging.getLogger("gridhodge.simplicial")

# Boundary matrices up to this size get an exact rational rank.
EXACT_RANK_LIMIT = 60

# Triangles with area below this multiple of their summed squared edge
# lengths count as flat.
DEGENERATE_AREA = 1e-12


class ComplexError(ValueError):
    """Input does not describe a valid complex."""


class LaplacianConsistencyError(RuntimeError):
    """Two constructions of the same combinatorial quantity disagree."""


# ======================== COMPLEXES ========================

@dataclass
class SimplicialComplex:
    """simplices[k] lists the k-simplices as ascending vertex tuples, sorted."""

    simplices: list[list[tuple[int, ...]]]
    vertices: Optional[np.ndarray] = None
    _index: list[dict] = field(init=False, repr=False)

    def __post_init__(self):
        self.simplices = [sorted(tuple(sorted(int(v) for v in s)) for s in level) for level in self.simplices]
        self._index = [{s: i for i, s in enumerate(level)} for level in self.simplices]
        for k, level in enumerate(self.simplices):
            if len(self._index[k]) != len(level):
                raise ComplexError(f"duplicate {k}-simplices")
            for s in level:
                if len(s) != k + 1 or len(set(s)) != k + 1:
                    raise ComplexError(f"{s} is not a {k}-simplex")
        if self.vertices is not None:
            self.vertices = np.asarray(self.vertices, dtype=float)
            if len(self.vertices) != self.count(0):
                raise ComplexError("one position per vertex required")

    @classmethod
    def from_simplices(
        cls,
        top: Iterable[Sequence[int]],
        vertices: Optional[np.ndarray] = None,
        n_vertices: Optional[int] = None,
    ) -> "SimplicialComplex":
        """Downward closure of the given simplices."""
        levels: dict[int, set] = defaultdict(set)
        for s in top:
            s = tuple(sorted(int(v) for v in s))
            if len(set(s)) != len(s):
                raise ComplexError(f"simplex {s} repeats a vertex")
            for k in range(len(s)):
                levels[k].update(combinations(s, k + 1))
        if n_vertices is None and vertices is not None:
            n_vertices = len(vertices)
        if n_vertices is not None:
            levels[0].update((v,) for v in range(n_vertices))
        dim = max(levels) if levels else 0
        return cls([sorted(levels[k]) for k in range(dim + 1)], vertices)

    @property
    def dim(self) -> int:
        return len(self.simplices) - 1

    def count(self, k: int) -> int:
        return len(self.simplices[k]) if 0 <= k < len(self.simplices) else 0

    def index(self, k: int) -> dict:
        return self._index[k] if 0 <= k < len(self._index) else {}

    def boundary(self, k: int) -> sp.csr_matrix:
        """B_k of shape (n_{k-1}, n_k); face i of a simplex gets sign (-1)^i."""
        rows_n = self.count(k - 1) if k > 0 else 0
        if k <= 0 or self.count(k) == 0:
            return sp.csr_matrix((rows_n, self.count(k)))
        faces = self.index(k - 1)
        rows, cols, vals = [], [], []
        for j, s in enumerate(self.simplices[k]):
            for i in range(k + 1):
                rows.append(faces[s[:i] + s[i + 1:]])
                cols.append(j)
                vals.append(-1.0 if i % 2 else 1.0)
        return sp.csr_matrix((vals, (rows, cols)), shape=(rows_n, self.count(k)))


@dataclass
class PolygonComplex:
    """2-complex with faces given as vertex cycles; edges are oriented low -> high."""

    n_vertices: int
    faces: list[tuple[int, ...]]
    vertices: Optional[np.ndarray] = None
    edges: list[tuple[int, int]] = field(init=False)
    _edge_index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.faces = [tuple(int(v) for v in face) for face in self.faces]
        edges = set()
        for face in self.faces:
            if len(face) < 3 or len(set(face)) != len(face):
                raise ComplexError(f"face {face} is not a simple cycle")
            for a, b in zip(face, face[1:] + face[:1]):
                if not (0 <= a < self.n_vertices and 0 <= b < self.n_vertices):
                    raise ComplexError(f"face {face} references a missing vertex")
                edges.add((min(a, b), max(a, b)))
        self.edges = sorted(edges)
        self._edge_index = {e: i for i, e in enumerate(self.edges)}

    @property
    def dim(self) -> int:
        return 2

    def count(self, k: int) -> int:
        return {0: self.n_vertices, 1: len(self.edges), 2: len(self.faces)}.get(k, 0)

    def boundary(self, k: int) -> sp.csr_matrix:
        if k == 1:
            e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
            cols = np.repeat(np.arange(len(e)), 2)
            vals = np.tile([-1.0, 1.0], len(e))
            return sp.csr_matrix((vals, (e.ravel(), cols)), shape=(self.n_vertices, len(e)))
        if k == 2:
            rows, cols, vals = [], [], []
            for j, face in enumerate(self.faces):
                for a, b in zip(face, face[1:] + face[:1]):
                    rows.append(self._edge_index[(min(a, b), max(a, b))])
                    cols.append(j)
                    vals.append(1.0 if a < b else -1.0)
            return sp.csr_matrix((vals, (rows, cols)), shape=(len(self.edges), len(self.faces)))
        return sp.csr_matrix((self.count(k - 1) if k > 0 else 0, self.count(k)))


Complex = Union[SimplicialComplex, PolygonComplex]


def clique_complex(edges: Iterable[Sequence[int]], n_vertices: Optional[int] = None, max_dim: int = 3) -> SimplicialComplex:
    """Flag complex of a simple undirected graph, up to max_dim."""
    edge_list = [tuple(int(v) for v in e) for e in edges]
    if n_vertices is None:
        n_vertices = 1 + max((max(e) for e in edge_list), default=-1)
    adjacency = [set() for _ in range(n_vertices)]
    seen = set()
    for e in edge_list:
        if len(e) != 2:
            raise ComplexError(f"edge {e} must have two endpoints")
        a, b = e
        if a == b:
            raise ComplexError(f"self-loop at vertex {a}")
        if not (0 <= a < n_vertices and 0 <= b < n_vertices):
            raise ComplexError(f"edge {e} references a missing vertex")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise ComplexError(f"duplicate edge {key}")
        seen.add(key)
        adjacency[a].add(b)
        adjacency[b].add(a)

    levels = [[(v,) for v in range(n_vertices)], sorted(seen)]
    current = levels[1]
    for _ in range(2, max_dim + 1):
        grown = []
        for s in current:
            common = set.intersection(*(adjacency[v] for v in s))
            grown.extend(s + (w,) for w in sorted(common) if w > s[-1])
        if not grown:
            break
        levels.append(grown)
        current = grown
    logger.debug("clique complex sizes %s", [len(level) for level in levels])
    return SimplicialComplex(levels)


def boundary_matrix(cx: Complex, k: int) -> sp.csr_matrix:
    return cx.boundary(k)


# ======================== COMBINATORIAL LAPLACIAN ========================

def _product_laplacian(cx: Complex, k: int) -> sp.csr_matrix:
    up = cx.boundary(k + 1)
    down = cx.boundary(k)
    return (up @ up.T + down.T @ down).tocsr()


def _entry_rule_laplacian(cx: SimplicialComplex, k: int) -> sp.csr_matrix:
    """
    L^G_k entry by entry: the diagonal is the upper degree plus the number
    of faces; off the diagonal, upper-adjacent pairs give 0 and pairs that
    only share a face give the product of their induced orientations.
    """
    n = cx.count(k)
    diag = np.full(n, float(k + 1) if k > 0 else 0.0)
    for s in cx.simplices[k + 1] if k + 1 <= cx.dim else []:
        for i in range(len(s)):
            diag[cx.index(k)[s[:i] + s[i + 1:]]] += 1.0

    rows, cols, vals = list(range(n)), list(range(n)), list(diag)
    if k == 0:
        for a, b in cx.simplices[1] if cx.dim >= 1 else []:
            rows += [a, b]
            cols += [b, a]
            vals += [-1.0, -1.0]
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))

    cofaces = defaultdict(list)
    for j, s in enumerate(cx.simplices[k]):
        for i in range(k + 1):
            cofaces[s[:i] + s[i + 1:]].append((j, -1.0 if i % 2 else 1.0))
    upper = cx.index(k + 1)
    for members in cofaces.values():
        for (i, si), (j, sj) in combinations(members, 2):
            union = tuple(sorted(set(cx.simplices[k][i]) | set(cx.simplices[k][j])))
            value = 0.0 if union in upper else si * sj
            rows += [i, j]
            cols += [j, i]
            vals += [value, value]
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def combinatorial_laplacian(cx: Complex, k: int, check: bool = True) -> sp.csr_matrix:
    """L^G_k = B_{k+1} B_{k+1}^T + B_k^T B_k, cross-checked against the entry rules."""
    if not 0 <= k <= cx.dim:
        raise ValueError(f"k must lie in [0, {cx.dim}], got {k}")
    L = _product_laplacian(cx, k)
    if check and isinstance(cx, SimplicialComplex):
        mismatch = abs(L - _entry_rule_laplacian(cx, k))
        if mismatch.nnz and mismatch.max() > 0:
            raise LaplacianConsistencyError(f"L^G_{k}: product and entry-rule constructions differ")
    return L


# ======================== BETTI NUMBERS ========================

def _rank(B: sp.spmatrix) -> int:
    if min(B.shape) == 0 or B.nnz == 0:
        return 0
    dense = B.toarray()
    if max(B.shape) <= EXACT_RANK_LIMIT:
        return int(sympy.Matrix(dense.astype(np.int64)).rank())
    return int(np.linalg.matrix_rank(dense))


def _spectral_kernel(L: sp.spmatrix) -> int:
    if L.shape[0] == 0:
        return 0
    vals = scipy.linalg.eigvalsh(L.toarray())
    cutoff = 1e-8 * max(1.0, float(np.max(np.abs(vals))))
    return int(np.count_nonzero(vals <= cutoff))


def betti_numbers(
    cx: Complex,
    max_k: Optional[int] = None,
    method: Literal["rank", "spectral", "both"] = "rank",
) -> tuple[int, ...]:
    """β_k = n_k - rank B_k - rank B_{k+1}, or dim ker L^G_k for the spectral method."""
    max_k = cx.dim if max_k is None else max_k
    result = []
    for k in range(max_k + 1):
        by_rank = cx.count(k) - _rank(cx.boundary(k)) - _rank(cx.boundary(k + 1))
        if method == "rank":
            result.append(by_rank)
            continue
        by_spectrum = _spectral_kernel(_product_laplacian(cx, k))
        if method == "both" and by_spectrum != by_rank:
            raise LaplacianConsistencyError(f"β_{k}: rank gives {by_rank}, spectrum gives {by_spectrum}")
        result.append(by_spectrum)
    return tuple(result)


def euler_characteristic(cx: Complex) -> int:
    return sum((-1) ** k * cx.count(k) for k in range(cx.dim + 1))


# ======================== TRIANGLE MESH STARS ========================

def _triangle_geometry(mesh: SimplicialComplex):
    if mesh.vertices is None or mesh.dim < 2:
        raise ComplexError("mesh needs vertex positions and triangles")
    tris = np.asarray(mesh.simplices[2], dtype=np.int64)
    V = mesh.vertices
    if V.shape[1] == 2:
        V = np.hstack([V, np.zeros((len(V), 1))])
    a, b, c = V[tris[:, 0]], V[tris[:, 1]], V[tris[:, 2]]
    area = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    edge_sq = np.sum((b - a) ** 2 + (c - b) ** 2 + (a - c) ** 2, axis=1)
    flat = area <= DEGENERATE_AREA * edge_sq
    if np.any(flat):
        first = tuple(int(v) for v in tris[np.flatnonzero(flat)[0]])
        raise ComplexError(f"zero-area triangle {first} ({int(flat.sum())} in total)")
    return tris, V


def triangle_areas(mesh: SimplicialComplex) -> np.ndarray:
    tris, V = _triangle_geometry(mesh)
    cross = np.cross(V[tris[:, 1]] - V[tris[:, 0]], V[tris[:, 2]] - V[tris[:, 0]])
    return 0.5 * np.linalg.norm(cross, axis=1)


def cotangent_star_1(mesh: SimplicialComplex, boundary: Literal["single", "half"] = "single") -> np.ndarray:
    """
    Edge weights of the cotangent Laplacian, in mesh.simplices[1] order.

    Interior edges get half the sum of the cotangents of their two opposite
    angles. Boundary edges get their single cotangent ("single") or half of
    it ("half", the linear finite element weight). Weights may be zero or
    negative on non-Delaunay meshes, so they are returned as a plain array.
    """
    if boundary not in ("single", "half"):
        raise ValueError(f"boundary rule must be 'single' or 'half', got '{boundary}'")
    tris, V = _triangle_geometry(mesh)
    edge_index = mesh.index(1)
    total = np.zeros(mesh.count(1))
    touching = np.zeros(mesh.count(1), dtype=np.int64)
    for o, a, b in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        u = V[tris[:, a]] - V[tris[:, o]]
        v = V[tris[:, b]] - V[tris[:, o]]
        cot = np.einsum("ij,ij->i", u, v) / np.linalg.norm(np.cross(u, v), axis=1)
        for t, (ea, eb) in enumerate(zip(tris[:, a], tris[:, b])):
            e = edge_index[(min(ea, eb), max(ea, eb))]
            total[e] += cot[t]
            touching[e] += 1
    boundary_factor = 1.0 if boundary == "single" else 0.5
    return np.where(touching >= 2, 0.5 * total, boundary_factor * total)


def barycentric_star_0(mesh: SimplicialComplex) -> np.ndarray:
    """Lumped vertex mass: a third of the area of every incident triangle."""
    tris, _ = _triangle_geometry(mesh)
    mass = np.zeros(mesh.count(0))
    np.add.at(mass, tris.ravel(), np.repeat(triangle_areas(mesh) / 3.0, 3))
    return mass


def triangle_star_2(mesh: SimplicialComplex) -> np.ndarray:
    return 1.0 / triangle_areas(mesh)


def cotangent_laplacian(
    mesh: SimplicialComplex,
    boundary: Literal["single", "half"] = "single",
    lumped_mass: bool = False,
) -> tuple[sp.csr_matrix, Optional[np.ndarray]]:
    """Stiffness D_0^T W D_0 with cotangent weights W, and the vertex mass (None = identity)."""
    d0 = mesh.boundary(1).T.tocsr()
    L = (d0.T @ sp.diags(cotangent_star_1(mesh, boundary)) @ d0).tocsr()
    return L, barycentric_star_0(mesh) if lumped_mass else None
