"""
Smallest eigenpairs of the generalized problem L x = λ S x, where L is a
sparse symmetric positive semi-definite stiffness matrix and S a positive
diagonal mass.

Small systems are whitened by S^(-1/2) and solved densely; larger ones
go through ARPACK in shift-invert mode around a tiny negative shift, so
kernel vectors are found as well-separated extreme eigenvalues of the
inverse operator.
"""

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal, NamedTuple, Optional, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from settings import get_settings

if TYPE_CHECKING:
    from boundary_ops import DiagonalStar

logger = logging.getLogger("gridhodge.eigensolver")

SHIFT_FACTOR = 1e-8
KERNEL_ABS_FACTOR = 1e-8


class EigenSolveError(RuntimeError):
    """Factorization failure, non-convergence or a violated residual bound."""

    def __init__(self, message: str, residuals: Optional[np.ndarray] = None):
        super().__init__(message)
        self.residuals = residuals


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray  # ascending, scale not applied
    eigenvectors: Optional[np.ndarray]
    residuals: np.ndarray
    method: str
    operator_norm: float  # Frobenius norm of S^(-1/2) L S^(-1/2)
    size: int
    scale: float = 1.0

    @property
    def scaled(self) -> np.ndarray:
        return self.eigenvalues * self.scale

    def __len__(self) -> int:
        return len(self.eigenvalues)


class KernelEstimate(NamedTuple):
    dim: int
    indeterminate: bool
    threshold: float


MassLike = Union[None, np.ndarray, sp.spmatrix, "DiagonalStar"]


def _mass_diagonal(S: MassLike, n: int) -> np.ndarray:
    if S is None:
        return np.ones(n)
    if hasattr(S, "diag") and not callable(S.diag):
        s = np.asarray(S.diag, dtype=float)
    elif sp.issparse(S):
        s = np.asarray(S.diagonal(), dtype=float)
    else:
        s = np.asarray(S, dtype=float)
        if s.ndim == 2:
            s = np.diag(s).copy()
    if s.shape != (n,):
        raise ValueError(f"mass has {s.shape} entries for a system of size {n}")
    if np.any(s <= 0) or not np.all(np.isfinite(s)):
        raise ValueError("mass diagonal must be strictly positive and finite")
    return s


def _residuals(L: sp.spmatrix, s: np.ndarray, vals: np.ndarray, vecs: np.ndarray, norm_l: float) -> np.ndarray:
    r = L @ vecs - (s[:, None] * vecs) * vals[None, :]
    denom = max(norm_l, np.finfo(float).tiny) * np.linalg.norm(vecs, axis=0)
    return np.linalg.norm(r, axis=0) / denom


def _dense(L: sp.spmatrix, s: np.ndarray, m: int):
    w = 1.0 / np.sqrt(s)
    A = L.toarray() * w[:, None] * w[None, :]
    A = 0.5 * (A + A.T)
    vals, y = scipy.linalg.eigh(A, subset_by_index=[0, m - 1])
    return vals, y * w[:, None]


def _shift_invert(L: sp.spmatrix, s: np.ndarray, m: int):
    n = L.shape[0]
    # trace ratio keeps the shift in eigenvalue units for any mass
    sigma = SHIFT_FACTOR * L.diagonal().sum() / s.sum()
    if sigma <= 0:
        sigma = SHIFT_FACTOR
    M = sp.diags(s, format="csc")
    try:
        lu = spla.splu((L + sigma * M).tocsc())
    except RuntimeError as e:
        raise EigenSolveError(f"factorization of L + {sigma:.3g} S failed: {e}") from e

    op = spla.LinearOperator((n, n), matvec=lu.solve, dtype=float)
    v0 = np.random.default_rng(0).standard_normal(n)
    try:
        vals, vecs = spla.eigsh(L, k=m, M=M, sigma=-sigma, which="LM", OPinv=op, tol=0, v0=v0)
    except spla.ArpackNoConvergence as e:
        raise EigenSolveError(f"ARPACK did not converge: {len(e.eigenvalues)} of {m} pairs") from e
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def smallest_eigenpairs(
    L: sp.spmatrix,
    S: MassLike = None,
    m: Optional[int] = None,
    tol: Optional[float] = None,
    method: Literal["auto", "dense", "shift-invert"] = "auto",
    dense_limit: Optional[int] = None,
    return_vectors: bool = True,
    scale: float = 1.0,
) -> SpectrumResult:
    """
    The m smallest eigenpairs of L x = λ S x (S=None means identity).

    Every returned pair satisfies ‖Lx − λSx‖ ≤ tol·‖L‖·‖x‖ with ‖L‖ the
    Frobenius norm; a violation raises EigenSolveError carrying the
    residuals.
    """
    settings = get_settings()
    m = settings.default_m if m is None else m
    tol = settings.eig_tol if tol is None else tol
    dense_limit = settings.dense_limit if dense_limit is None else dense_limit

    L = sp.csr_matrix(L, dtype=float)
    n = L.shape[0]
    if L.shape != (n, n):
        raise ValueError(f"stiffness must be square, got {L.shape}")
    if m < 0 or m > n:
        raise ValueError(f"requested {m} eigenpairs from a system of size {n}")
    s = _mass_diagonal(S, n)
    norm_l = float(spla.norm(L)) if n else 0.0
    w = sp.diags(1.0 / np.sqrt(s))
    norm_whitened = float(spla.norm(w @ L @ w)) if n else 0.0

    if m == 0:
        empty = np.zeros(0)
        return SpectrumResult(empty, np.zeros((n, 0)) if return_vectors else None, empty, "none", norm_whitened, n, scale)

    if method == "auto":
        method = "dense" if n <= dense_limit or m >= n - 1 else "shift-invert"
    if method == "shift-invert" and m >= n - 1:
        raise ValueError("shift-invert needs m < n - 1; use the dense path")
    logger.info("solving %d smallest of n=%d (%s)", m, n, method)

    if method == "dense":
        vals, vecs = _dense(L, s, m)
    elif method == "shift-invert":
        vals, vecs = _shift_invert(L, s, m)
    else:
        raise ValueError(f"unknown eigensolver method '{method}'")

    residuals = _residuals(L, s, vals, vecs, norm_l)
    if np.any(residuals > tol):
        worst = float(residuals.max())
        raise EigenSolveError(f"residual bound {tol:g} violated (worst {worst:.3g})", residuals)

    return SpectrumResult(
        eigenvalues=vals,
        eigenvectors=vecs if return_vectors else None,
        residuals=residuals,
        method=method,
        operator_norm=norm_whitened,
        size=n,
        scale=scale,
    )


def kernel_dimension(result: SpectrumResult, zero_tol: Optional[float] = None) -> KernelEstimate:
    """
    Count the leading eigenvalues that sit below a spectral gap.

    The split is the first eigenvalue λ_i above the absolute floor
    1e-8·‖S^(-1/2) L S^(-1/2)‖/n for which every earlier eigenvalue is
    at most zero_tol·λ_i.
    Without such a split the floor alone decides and the estimate is
    flagged indeterminate (typically: ask for more eigenvalues).
    """
    zero_tol = get_settings().zero_tol if zero_tol is None else zero_tol
    vals = np.asarray(result.eigenvalues, dtype=float)
    floor = KERNEL_ABS_FACTOR * result.operator_norm / max(result.size, 1)

    for i, lam in enumerate(vals):
        if lam > floor and np.all(np.abs(vals[:i]) <= zero_tol * lam):
            return KernelEstimate(i, False, zero_tol * lam)

    count = int(np.count_nonzero(np.abs(vals) <= floor))
    logger.warning("⚠️ no spectral gap among %d eigenvalues; kernel estimate %d is indeterminate", len(vals), count)
    return KernelEstimate(count, True, floor)


def group_multiplicities(values, rel_tol: float = 1e-6) -> np.ndarray:
    """Group ids for sorted eigenvalues; neighbours within rel_tol share an id."""
    vals = np.asarray(values, dtype=float)
    groups = np.zeros(len(vals), dtype=np.int64)
    if not len(vals):
        return groups
    floor = 1e-12 * float(np.max(np.abs(vals)))
    start, gid = vals[0], 0
    for i in range(1, len(vals)):
        if abs(vals[i] - start) > rel_tol * max(abs(vals[i]), abs(start)) + floor:
            gid += 1
            start = vals[i]
        groups[i] = gid
    return groups
