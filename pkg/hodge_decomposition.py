"""
Hodge decomposition of 1-forms on a DEC chain.

    ω = D0 α  +  S1^-1 D1^T γ  +  h
        exact     coexact         harmonic

The exact potential solves (D0^T S1 D0) α = D0^T S1 ω, the coexact one
(D1 S1^-1 D1^T) γ = D1 ω, both by preconditioned CG; the harmonic part is
what remains. The three parts are mutually orthogonal in the S1 inner
product up to the solver tolerance.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from laplacian_assembly import DecOperators
from settings import get_settings

logger = logging.getLogger("gridhodge.decomposition")


class DecompositionError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class DiscreteForm:
    k: int
    values: np.ndarray


@dataclass(frozen=True)
class DecChain:
    """D0, D1 and the diagonal stars S0, S1, S2 of the 1-form neighbourhood."""

    d0: sp.csr_matrix
    d1: Optional[sp.csr_matrix]
    s0: np.ndarray
    s1: np.ndarray
    s2: Optional[np.ndarray]

    @classmethod
    def from_operators(cls, ops: DecOperators) -> "DecChain":
        if ops.stars is None:
            raise ValueError("operator chain was assembled without stars")
        d1 = ops.coboundaries[1] if ops.dim >= 2 else None
        s2 = ops.stars[2].diag if ops.dim >= 2 else None
        return cls(ops.coboundaries[0], d1, ops.stars[0].diag, ops.stars[1].diag, s2)

    def with_identity_stars(self, drop_curl: bool = False) -> "DecChain":
        """Same incidence with unit stars; drop_curl removes the 2-cells (1-skeleton clique complex)."""
        d1 = None if drop_curl else self.d1
        return DecChain(
            self.d0,
            d1,
            np.ones_like(self.s0),
            np.ones_like(self.s1),
            None if d1 is None else np.ones(d1.shape[0]),
        )

    def inner(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(np.dot(a, self.s1 * b))

    def norm(self, a: np.ndarray) -> float:
        return float(np.sqrt(max(self.inner(a, a), 0.0)))


@dataclass(frozen=True)
class HodgeComponents:
    exact: np.ndarray
    coexact: np.ndarray
    harmonic: np.ndarray
    potential: np.ndarray
    copotential: np.ndarray

    def reconstruction_residual(self, form: DiscreteForm) -> float:
        total = self.exact + self.coexact + self.harmonic
        scale = max(np.linalg.norm(form.values), np.finfo(float).tiny)
        return float(np.linalg.norm(form.values - total) / scale)


def _solve_psd(
    A: sp.csr_matrix,
    b: np.ndarray,
    tol: float,
    label: str,
    deflate_constants: bool,
    scale: float,
) -> np.ndarray:
    """
    CG on the semi-definite system A x = b.

    `scale` bounds ‖b‖ for the form at hand (operator norm times form
    norm). A source below tol·scale is round-off of an exactly zero
    source and gives x = 0.
    """
    n = A.shape[0]
    if deflate_constants and n:
        b = b - b.mean()
    floor = tol * scale
    b_norm = float(np.linalg.norm(b))
    if n == 0 or b_norm <= floor:
        logger.debug("%s solve skipped: source %.3g below floor %.3g", label, b_norm, floor)
        return np.zeros(n)
    diag = A.diagonal()
    precond = sp.diags(np.where(diag > 0, 1.0 / np.where(diag > 0, diag, 1.0), 1.0))
    x, info = spla.cg(A, b, rtol=tol, atol=0.0, maxiter=max(10 * n, 1000), M=precond)
    if deflate_constants:
        x = x - x.mean()
    residual = float(np.linalg.norm(A @ x - b))
    if info != 0 and residual > max(tol * b_norm, floor):
        relative = residual / b_norm
        raise DecompositionError(f"{label} solve stalled at relative residual {relative:.3g}", relative)
    logger.debug("%s solve: n=%d residual=%.3g", label, n, residual / b_norm)
    return x


def decompose(form: DiscreteForm, chain: DecChain, tol: Optional[float] = None) -> HodgeComponents:
    if form.k != 1:
        raise ValueError("decomposition is implemented for 1-forms")
    omega = np.asarray(form.values, dtype=float)
    if omega.shape != (chain.d0.shape[0],):
        raise ValueError(f"form has {omega.shape} values for {chain.d0.shape[0]} edges")
    tol = get_settings().cg_tol if tol is None else tol

    d0 = chain.d0
    S1 = sp.diags(chain.s1)
    omega_norm = float(np.linalg.norm(omega))
    A0 = (d0.T @ S1 @ d0).tocsr()
    constants = d0.shape[1] > 0 and not np.any(d0 @ np.ones(d0.shape[1]))
    exact_scale = float(spla.norm(d0.T @ S1)) * omega_norm
    alpha = _solve_psd(A0, d0.T @ (chain.s1 * omega), tol, "exact", constants, exact_scale)
    exact = d0 @ alpha

    if chain.d1 is not None and chain.d1.shape[0]:
        d1 = chain.d1
        A1 = (d1 @ sp.diags(1.0 / chain.s1) @ d1.T).tocsr()
        gamma = _solve_psd(A1, d1 @ omega, tol, "coexact", False, float(spla.norm(d1)) * omega_norm)
        coexact = (d1.T @ gamma) / chain.s1
    else:
        gamma = np.zeros(0 if chain.d1 is None else chain.d1.shape[0])
        coexact = np.zeros_like(omega)

    harmonic = omega - exact - coexact
    return HodgeComponents(exact, coexact, harmonic, alpha, gamma)


def discrete_curl(form: DiscreteForm, chain: DecChain) -> np.ndarray:
    if chain.d1 is None:
        return np.zeros(0)
    return chain.d1 @ form.values


def discrete_div(form: DiscreteForm, chain: DecChain) -> np.ndarray:
    return (chain.d0.T @ (chain.s1 * form.values)) / chain.s0


def graph_harmonic_field(chain: DecChain, values: np.ndarray, tol: Optional[float] = None) -> np.ndarray:
    """
    Remove the gradient part of a 1-form under unit stars, leaving a field
    that is harmonic for the clique complex of the grid's 1-skeleton.
    """
    identity = chain.with_identity_stars(drop_curl=True)
    return decompose(DiscreteForm(1, values), identity, tol).harmonic


def component_report(form: DiscreteForm, parts: HodgeComponents, chain: DecChain) -> dict:
    """
    S1-norm fractions of each part, the pairwise orthogonality defect, and
    the curl ‖D1 ω‖ and star-weighted divergence ‖S0^-1 D0^T S1 ω‖ of the
    input, each relative to ‖ω‖.
    """
    total = chain.norm(form.values)
    if total == 0:
        return {"norm": 0.0, "exact": 0.0, "coexact": 0.0, "harmonic": 0.0, "orthogonality": 0.0,
                "reconstruction": 0.0, "curl_of_exact": 0.0, "curl": 0.0, "div": 0.0}
    plain = float(np.linalg.norm(form.values))
    pairs = [(parts.exact, parts.coexact), (parts.exact, parts.harmonic), (parts.coexact, parts.harmonic)]
    curl_of_exact = 0.0
    if chain.d1 is not None and chain.d1.shape[0]:
        curl_of_exact = float(np.linalg.norm(chain.d1 @ parts.exact)) / plain
    return {
        "norm": total,
        "exact": chain.norm(parts.exact) / total,
        "coexact": chain.norm(parts.coexact) / total,
        "harmonic": chain.norm(parts.harmonic) / total,
        "orthogonality": max(abs(chain.inner(a, b)) for a, b in pairs) / total**2,
        "reconstruction": parts.reconstruction_residual(form),
        "curl_of_exact": curl_of_exact,
        "curl": float(np.linalg.norm(discrete_curl(form, chain))) / plain,
        "div": float(np.linalg.norm(discrete_div(form, chain))) / plain,
    }
