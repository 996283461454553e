"""
Closed-form Laplacian spectra used as references: disk, box, ball,
spherical shell, and the curl (cavity) spectrum of a box.

Radial problems reduce to roots of (spherical) Bessel functions or their
cross products. Roots are bracketed by sign changes on a fine scan and
polished with brentq; every root is re-checked by a sign change across a
bracket of width 1e-9.
"""

import itertools
import logging
import math
from typing import Callable, Literal, Sequence, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import jn_zeros, jnp_zeros, jv, jvp, spherical_jn, spherical_yn

logger = logging.getLogger("gridhodge.exact")

Bc = Literal["dirichlet", "neumann"]

ROOT_CHECK_WIDTH = 1e-9
MAX_SCAN = 1e4


class ExactSpectrumError(RuntimeError):
    """A root search ran past its bracket cap."""


def _check_bc(bc: str) -> None:
    if bc not in ("dirichlet", "neumann"):
        raise ValueError(f"boundary condition must be 'dirichlet' or 'neumann', got '{bc}'")


def _verified(f: Callable[[float], float], x: float) -> float:
    h = 0.5 * ROOT_CHECK_WIDTH
    if f(x - h) * f(x + h) > 0:
        raise ExactSpectrumError(f"no sign change around root candidate {x:.12g}")
    return x


def _scan_roots(f: Callable[[float], float], count: int, x_max: float, start: float, step: float) -> list[float]:
    """
    First `count` roots of f above `start` (fewer if x_max is reached first),
    bracketed on a grid of width `step`.
    """
    roots: list[float] = []
    a, fa = start, f(start)
    while len(roots) < count:
        b = a + step
        if b > x_max:
            break
        if b > MAX_SCAN:
            raise ExactSpectrumError(f"root scan passed {MAX_SCAN:g} with {len(roots)} of {count} roots")
        fb = f(b)
        if fa == 0.0:
            roots.append(_verified(f, a))
        elif fa * fb < 0:
            roots.append(_verified(f, brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)))
        a, fa = b, fb
    return roots


# ── Bessel zeros ──────────────────────────────────────────────────────────────

def bessel_zeros(n: int, count: int, derivative: bool = False) -> np.ndarray:
    """First `count` positive zeros of J_n (or J_n' when derivative=True)."""
    if n < 0:
        raise ValueError(f"order must be >= 0, got {n}")
    if count <= 0:
        return np.zeros(0)
    zeros = jnp_zeros(n, count) if derivative else jn_zeros(n, count)
    f = (lambda x: jvp(n, x)) if derivative else (lambda x: jv(n, x))
    for z in zeros:
        _verified(f, z)
    return np.asarray(zeros, dtype=float)


def _radial_spectrum(
    roots_for: Callable[[int, int, float], list[float]],
    multiplicity: Callable[[int], int],
    m: int,
    with_zero: bool,
) -> np.ndarray:
    """
    Merge k^2 over angular orders l = 0, 1, ... until the first root of the
    next order lies beyond the current m-th smallest value.
    """
    values: list[float] = [0.0] if with_zero else []
    bound = math.inf
    l = 0
    while True:
        k_max = math.sqrt(bound) * (1 + 1e-12) if math.isfinite(bound) else math.inf
        roots = roots_for(l, m, k_max)
        if not roots:
            break
        for k in roots:
            values.extend([k * k] * multiplicity(l))
        values.sort()
        if len(values) >= m:
            bound = values[m - 1]
        l += 1
    logger.debug("radial spectrum: %d angular orders below %.6g", l, bound)
    return np.asarray(values[:m], dtype=float)


def disk_spectrum(R: float, dirichlet: bool = True, m: int = 40) -> np.ndarray:
    """Eigenvalues (j_{n,s}/R)^2 with multiplicity 1 for n=0 and 2 otherwise."""
    if R <= 0:
        raise ValueError("R must be positive")
    if m <= 0:
        return np.zeros(0)

    def roots(n, count, k_max):
        z = bessel_zeros(n, count, derivative=not dirichlet) / R
        return [float(x) for x in z if x <= k_max]

    return _radial_spectrum(roots, lambda n: 1 if n == 0 else 2, m, with_zero=not dirichlet)


# ── Boxes ─────────────────────────────────────────────────────────────────────

def _box_sides(sides: Union[float, Sequence[float]], dim: int | None) -> np.ndarray:
    a = np.atleast_1d(np.asarray(sides, dtype=float))
    if a.size == 1 and dim is not None:
        a = np.full(dim, a[0])
    if a.size not in (2, 3) or np.any(a <= 0):
        raise ValueError(f"box needs 2 or 3 positive side lengths, got {a.tolist()}")
    return a


def _box_modes(a: np.ndarray, start: int, m: int, keep: Callable[[np.ndarray], np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Sorted values π^2 Σ (n_i/a_i)^2 over index tuples n_i >= start passing `keep`."""
    top = max(int(math.ceil(m ** (1 / len(a)))) + 2, 2)
    while True:
        axes = [np.arange(start, top + 1)] * len(a)
        idx = np.array(list(itertools.product(*axes)), dtype=float)
        idx = idx[keep(idx)]
        vals = np.pi**2 * np.sum((idx / a) ** 2, axis=1)
        order = np.argsort(vals, kind="stable")
        vals, idx = vals[order], idx[order]
        # smallest value any mode outside the enumerated cube could take
        outside = np.pi**2 * min(((top + 1) / ai) ** 2 for ai in a)
        if len(vals) >= m and vals[m - 1] <= outside:
            return vals, idx
        top *= 2


def box_spectrum(sides: Union[float, Sequence[float]], bc: Bc = "dirichlet", m: int = 40, dim: int | None = None) -> np.ndarray:
    """π^2 Σ (n_i/a_i)^2 with n_i >= 1 (Dirichlet) or n_i >= 0 (Neumann)."""
    _check_bc(bc)
    a = _box_sides(sides, dim)
    if m <= 0:
        return np.zeros(0)
    vals, _ = _box_modes(a, 1 if bc == "dirichlet" else 0, m, lambda idx: np.ones(len(idx), dtype=bool))
    return vals[:m]


def box_curl_spectrum(sides: Union[float, Sequence[float]], m: int = 40) -> np.ndarray:
    """
    Curl spectrum of a 3D box: π^2 Σ (n_i/a_i)^2 over n_i >= 0 with at most
    one zero index; two polarizations when every index is positive.
    """
    a = _box_sides(sides, 3)
    if len(a) != 3:
        raise ValueError("the curl spectrum is defined for 3D boxes")
    if m <= 0:
        return np.zeros(0)
    vals, idx = _box_modes(a, 0, m, lambda idx: np.count_nonzero(idx == 0, axis=1) <= 1)
    polarizations = np.where(np.all(idx > 0, axis=1), 2, 1)
    return np.repeat(vals, polarizations)[:m]


# ── Ball and shell ────────────────────────────────────────────────────────────

def _scan_step(scale: float) -> float:
    return 0.05 * min(1.0, math.pi / scale)


def ball_spectrum(R: float, bc: Bc = "dirichlet", m: int = 40) -> np.ndarray:
    """(z/R)^2 over zeros z of j_l (Dirichlet) or j_l' (Neumann), multiplicity 2l+1."""
    _check_bc(bc)
    if R <= 0:
        raise ValueError("R must be positive")
    if m <= 0:
        return np.zeros(0)
    derivative = bc == "neumann"
    step = _scan_step(R)

    def roots(l, count, k_max):
        f = lambda k: float(spherical_jn(l, k * R, derivative=derivative))  # noqa: E731
        return _scan_roots(f, count, k_max, start=step / 2, step=step)

    return _radial_spectrum(roots, lambda l: 2 * l + 1, m, with_zero=derivative)


def shell_spectrum(r_outer: float, r_inner: float, bc: Bc = "dirichlet", m: int = 40) -> np.ndarray:
    """
    Radial roots of the cross products
        Dirichlet: j_l(ka) y_l(kb) - j_l(kb) y_l(ka)
        Neumann:   j_l'(ka) y_l'(kb) - j_l'(kb) y_l'(ka)
    for b = r_outer, a = r_inner, multiplicity 2l+1.
    """
    _check_bc(bc)
    if not 0 < r_inner < r_outer:
        raise ValueError("need 0 < r_inner < r_outer")
    if m <= 0:
        return np.zeros(0)
    derivative = bc == "neumann"
    a, b = r_inner, r_outer
    step = _scan_step(b - a) * min(1.0, (b - a) / b)

    def cross(l):
        def f(k):
            ja = spherical_jn(l, k * a, derivative=derivative)
            jb = spherical_jn(l, k * b, derivative=derivative)
            ya = spherical_yn(l, k * a, derivative=derivative)
            yb = spherical_yn(l, k * b, derivative=derivative)
            value = ja * yb - jb * ya
            # the cross product only matters through its sign; keep it finite
            return float(value / max(abs(ya), 1.0))
        return f

    def roots(l, count, k_max):
        return _scan_roots(cross(l), count, k_max, start=step / 2, step=step)

    return _radial_spectrum(roots, lambda l: 2 * l + 1, m, with_zero=derivative)
