import pytest
import sys
import os

import numpy as np
import scipy.sparse as sp

sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

from eigensolver import (
    EigenSolveError,
    SpectrumResult,
    group_multiplicities,
    kernel_dimension,
    smallest_eigenpairs,
)


def _path_laplacian(n):
    main = np.full(n, 2.0)
    main[[0, -1]] = 1.0
    return sp.diags([main, -np.ones(n - 1), -np.ones(n - 1)], [0, 1, -1], format="csr")


def _random_system(n, seed, kernel=0):
    """Sparse PSD stiffness with a `kernel`-dimensional null space and a positive diagonal mass."""
    rng = np.random.default_rng(seed)
    rows = n + 2 * n
    D = sp.random(rows, n, density=3.0 / n, random_state=seed, format="csr")
    D = D + sp.eye(rows, n, format="csr")
    if kernel:
        D = D @ sp.diags(np.r_[np.zeros(kernel), np.ones(n - kernel)])
    L = (D.T @ D).tocsr()
    return L, rng.uniform(0.5, 2.0, n)


# ── Dense path ─────────────────────────────────────────────────────────────────

def test_path_graph_spectrum():
    n = 12
    result = smallest_eigenpairs(_path_laplacian(n), m=5)
    expected = 2 - 2 * np.cos(np.pi * np.arange(5) / n)
    np.testing.assert_allclose(result.eigenvalues, expected, atol=1e-12)
    assert result.method == "dense"
    assert result.eigenvectors.shape == (n, 5)


def test_generalized_problem_with_mass():
    L = sp.diags([2.0, 6.0, 12.0], format="csr")
    result = smallest_eigenpairs(L, np.array([2.0, 3.0, 4.0]), m=3)
    np.testing.assert_allclose(result.eigenvalues, [1.0, 2.0, 3.0])


def test_scale_applies_only_to_scaled_values():
    result = smallest_eigenpairs(_path_laplacian(4), m=2, scale=100.0)
    np.testing.assert_allclose(result.scaled, 100.0 * result.eigenvalues)


def test_full_spectrum_uses_dense_even_when_large(monkeypatch):
    monkeypatch.setenv("GRIDHODGE_DENSE_LIMIT", "2")
    result = smallest_eigenpairs(_path_laplacian(6), m=6)
    assert result.method == "dense"
    assert len(result) == 6


def test_zero_eigenpairs():
    result = smallest_eigenpairs(_path_laplacian(5), m=0)
    assert len(result) == 0
    assert result.eigenvectors.shape == (5, 0)


def test_vectors_can_be_dropped():
    result = smallest_eigenpairs(_path_laplacian(5), m=2, return_vectors=False)
    assert result.eigenvectors is None


# ── Shift-invert path ──────────────────────────────────────────────────────────

@pytest.mark.parametrize("seed,kernel", [(0, 0), (1, 1), (2, 1)])
def test_dense_and_shift_invert_agree(seed, kernel):
    L, s = _random_system(200, seed, kernel)
    dense = smallest_eigenpairs(L, s, m=10, method="dense")
    arpack = smallest_eigenpairs(L, s, m=10, method="shift-invert")
    scale = max(1.0, float(np.abs(dense.eigenvalues).max()))
    assert np.max(np.abs(dense.eigenvalues - arpack.eigenvalues)) <= 1e-8 * scale
    assert arpack.method == "shift-invert"
    assert kernel_dimension(dense).dim == kernel
    assert kernel_dimension(arpack).dim == kernel


@pytest.mark.parametrize("method,tolerance", [("dense", 1e-10), ("shift-invert", 1e-8)])
def test_relabelling_cells_leaves_the_spectrum_alone(method, tolerance):
    L, s = _random_system(200, 3, kernel=1)
    perm = np.random.default_rng(3).permutation(200)
    original = smallest_eigenpairs(L, s, m=8, method=method).eigenvalues
    permuted = smallest_eigenpairs(L[perm][:, perm], s[perm], m=8, method=method).eigenvalues
    scale = max(1.0, float(np.abs(original).max()))
    np.testing.assert_allclose(permuted, original, rtol=tolerance, atol=tolerance * scale)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_paths_agree_on_mid_sized_systems(seed):
    n = 500 + 75 * seed
    L, s = _random_system(n, seed, kernel=seed % 2)
    dense = smallest_eigenpairs(L, s, m=8, method="dense")
    arpack = smallest_eigenpairs(L, s, m=8, method="shift-invert")
    scale = max(1.0, float(np.abs(dense.eigenvalues).max()))
    assert np.max(np.abs(dense.eigenvalues - arpack.eigenvalues)) <= 1e-8 * scale
    assert np.all(arpack.residuals <= 1e-9)


def test_shift_invert_chosen_above_dense_limit():
    n = 400
    result = smallest_eigenpairs(_path_laplacian(n), m=4, dense_limit=100)
    assert result.method == "shift-invert"
    expected = 2 - 2 * np.cos(np.pi * np.arange(4) / n)
    np.testing.assert_allclose(result.eigenvalues, expected, atol=1e-10)


def test_shift_invert_refuses_nearly_full_spectrum():
    with pytest.raises(ValueError, match="dense"):
        smallest_eigenpairs(_path_laplacian(5), m=4, method="shift-invert")


def test_residuals_are_bounded():
    L, s = _random_system(80, 4)
    result = smallest_eigenpairs(L, s, m=6, tol=1e-9)
    assert np.all(result.residuals <= 1e-9)


def test_impossible_residual_bound_raises():
    L, s = _random_system(50, 5)
    with pytest.raises(EigenSolveError) as exc_info:
        smallest_eigenpairs(L, s, m=3, tol=1e-300)
    assert exc_info.value.residuals is not None


# ── Argument checks ────────────────────────────────────────────────────────────

def test_too_many_eigenpairs_rejected():
    with pytest.raises(ValueError, match="requested"):
        smallest_eigenpairs(_path_laplacian(3), m=4)


def test_non_positive_mass_rejected():
    with pytest.raises(ValueError, match="positive"):
        smallest_eigenpairs(_path_laplacian(3), np.array([1.0, 0.0, 1.0]), m=1)


def test_mass_length_checked():
    with pytest.raises(ValueError, match="entries"):
        smallest_eigenpairs(_path_laplacian(3), np.ones(4), m=1)


def test_unknown_method():
    with pytest.raises(ValueError, match="method"):
        smallest_eigenpairs(_path_laplacian(3), m=1, method="lanczos")


# ── Kernel and multiplicities ──────────────────────────────────────────────────

def _result(values, norm=10.0, size=100):
    values = np.asarray(values, dtype=float)
    return SpectrumResult(values, None, np.zeros(len(values)), "dense", norm, size)


def test_kernel_below_gap():
    estimate = kernel_dimension(_result([1e-13, -2e-14, 0.5, 0.7]))
    assert estimate.dim == 2
    assert not estimate.indeterminate


def test_kernel_of_positive_spectrum_is_zero():
    assert kernel_dimension(_result([0.3, 0.5])).dim == 0


def test_kernel_without_gap_is_indeterminate():
    estimate = kernel_dimension(_result([1e-14, 2e-14]))
    assert estimate.indeterminate
    assert estimate.dim == 2


def test_small_but_gapless_values_are_not_kernel():
    # 1e-3 already clears the absolute floor
    estimate = kernel_dimension(_result([1e-3, 2e-3, 0.5]), zero_tol=1e-6)
    assert estimate.dim == 0


def test_group_multiplicities():
    groups = group_multiplicities([0.0, 1.0, 1.0 + 1e-9, 2.0, 2.0, 2.0000001, 3.5])
    assert groups.tolist() == [0, 1, 1, 2, 2, 2, 3]


def test_group_multiplicities_empty():
    assert group_multiplicities([]).tolist() == []


def test_kernel_floor_follows_the_mass():
    # raw stiffness entries far above the generalized spectrum, as for clamped sliver cells
    L = sp.diags([0.0, 1.0, 1e20], format="csr")
    result = smallest_eigenpairs(L, np.array([1.0, 1.0, 1e14]), m=3)
    np.testing.assert_allclose(result.eigenvalues, [0.0, 1.0, 1e6], rtol=1e-12, atol=1e-12)
    estimate = kernel_dimension(result)
    assert estimate.dim == 1
    assert not estimate.indeterminate


def test_shift_invert_with_stiff_sliver_rows():
    n = 100
    L = _path_laplacian(n).tolil()
    L[n - 1, n - 1] += 1e12
    s = np.ones(n)
    s[n - 1] = 1e9
    dense = smallest_eigenpairs(L.tocsr(), s, m=4, method="dense")
    arpack = smallest_eigenpairs(L.tocsr(), s, m=4, method="shift-invert")
    np.testing.assert_allclose(arpack.eigenvalues, dense.eigenvalues, rtol=1e-8, atol=1e-10)
    assert kernel_dimension(dense).dim == 0
    assert kernel_dimension(arpack).dim == 0
