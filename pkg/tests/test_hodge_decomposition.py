import pytest
import sys
import os

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

from grid_complex import build_grid
from hodge_decomposition import (
    DecChain,
    DiscreteForm,
    component_report,
    decompose,
    discrete_curl,
    discrete_div,
    graph_harmonic_field,
)
from laplacian_assembly import assemble_operators
from shapes_sdf import Disk, Torus, sample_sdf

L_G = 0.1
EPS = 1e-2 * L_G
CG_TOL = 1e-12


def _disk_chain(bc="normal"):
    grid = build_grid(Disk(R=1.0).bbox(), L_G, 2)
    return DecChain.from_operators(assemble_operators(grid, sample_sdf(Disk(R=1.0), grid), bc, EPS))


def _random_form(chain, seed=0):
    rng = np.random.default_rng(seed)
    return DiscreteForm(1, rng.standard_normal(chain.d0.shape[0]))


# ── Components ─────────────────────────────────────────────────────────────────

@pytest.mark.parametrize("bc", ["normal", "tangential"])
def test_parts_reconstruct_and_are_orthogonal(bc):
    chain = _disk_chain(bc)
    form = _random_form(chain)
    parts = decompose(form, chain, tol=CG_TOL)
    report = component_report(form, parts, chain)

    assert report["reconstruction"] < 1e-10
    assert report["orthogonality"] < 1e-8
    assert report["curl_of_exact"] < 1e-12
    # a disk carries no harmonic 1-forms under either boundary condition
    assert report["harmonic"] < 1e-6
    assert report["exact"] ** 2 + report["coexact"] ** 2 == pytest.approx(1.0, abs=1e-8)


def test_gradient_is_all_exact():
    chain = _disk_chain()
    phi = np.random.default_rng(1).standard_normal(chain.d0.shape[1])
    form = DiscreteForm(1, chain.d0 @ phi)
    parts = decompose(form, chain, tol=CG_TOL)
    report = component_report(form, parts, chain)

    assert report["exact"] >= 0.999999
    assert report["coexact"] < 1e-12
    np.testing.assert_allclose(parts.potential, phi, atol=1e-6)


@pytest.mark.parametrize("bc", ["normal", "tangential"])
def test_gradient_leaves_nothing_for_the_curl_solve(bc):
    chain = _disk_chain(bc)
    phi = np.random.default_rng(7).standard_normal(chain.d0.shape[1])
    form = DiscreteForm(1, chain.d0 @ phi)
    # D1 D0 φ is pure round-off; the default tolerance must not chase it
    parts = decompose(form, chain)
    report = component_report(form, parts, chain)

    assert not np.any(parts.copotential)
    assert not np.any(parts.coexact)
    assert report["exact"] >= 0.999999
    assert report["curl"] < 1e-12
    assert report["div"] > 0.0


def test_coexact_part_is_divergence_free():
    chain = _disk_chain()
    parts = decompose(_random_form(chain, seed=2), chain, tol=CG_TOL)
    div = discrete_div(DiscreteForm(1, parts.coexact), chain)
    scale = np.abs(discrete_div(DiscreteForm(1, parts.exact), chain)).max()
    assert np.abs(div).max() <= 1e-10 * scale


def test_harmonic_part_is_closed():
    chain = _disk_chain()
    form = _random_form(chain, seed=3)
    parts = decompose(form, chain, tol=CG_TOL)
    curl = discrete_curl(DiscreteForm(1, parts.harmonic), chain)
    assert np.linalg.norm(curl) <= 1e-8 * np.linalg.norm(discrete_curl(form, chain))


def test_zero_form_decomposes_to_zero():
    chain = _disk_chain()
    form = DiscreteForm(1, np.zeros(chain.d0.shape[0]))
    parts = decompose(form, chain)
    assert not np.any(parts.exact) and not np.any(parts.coexact) and not np.any(parts.harmonic)
    assert component_report(form, parts, chain)["norm"] == 0.0


# ── Argument checks ────────────────────────────────────────────────────────────

def test_only_one_forms():
    chain = _disk_chain()
    with pytest.raises(ValueError, match="1-forms"):
        decompose(DiscreteForm(0, np.zeros(chain.d0.shape[1])), chain)


def test_form_length_checked():
    chain = _disk_chain()
    with pytest.raises(ValueError, match="edges"):
        decompose(DiscreteForm(1, np.zeros(chain.d0.shape[0] + 1)), chain)


def test_chain_needs_stars():
    grid = build_grid(Disk(R=1.0).bbox(), 0.5, 2)
    ops = assemble_operators(grid, sample_sdf(Disk(R=1.0), grid), with_stars=False)
    with pytest.raises(ValueError, match="stars"):
        DecChain.from_operators(ops)


# ── Graph-harmonic fields ──────────────────────────────────────────────────────

def test_graph_harmonic_field_is_divergence_free_under_unit_stars():
    chain = _disk_chain()
    values = graph_harmonic_field(chain, _random_form(chain, seed=4).values, tol=CG_TOL)
    assert np.linalg.norm(chain.d0.T @ values) <= 1e-9 * np.linalg.norm(values)


def test_graph_harmonic_field_is_not_harmonic_on_a_torus():
    torus = Torus(R_major=1.0, r_minor=0.45)
    grid = build_grid(torus.bbox(), 0.2, 3)
    ops = assemble_operators(grid, sample_sdf(torus, grid), "normal", 2e-3)
    chain = DecChain.from_operators(ops)
    values = graph_harmonic_field(chain, np.random.default_rng(5).standard_normal(chain.d0.shape[0]))
    form = DiscreteForm(1, values)
    report = component_report(form, decompose(form, chain), chain)

    assert report["exact"] > 1e-4
    assert report["coexact"] > 0.1
    assert report["reconstruction"] < 1e-10
    # neither curl-free nor divergence-free once the true stars are used
    assert report["curl"] > 1e-3
    assert report["div"] > 1e-3


# ── Harmonic space ─────────────────────────────────────────────────────────────

def test_random_forms_on_a_solid_torus_share_one_harmonic_direction():
    torus = Torus(R_major=1.0, r_minor=0.45)
    grid = build_grid(torus.bbox(), 0.2, 3)
    ops = assemble_operators(grid, sample_sdf(torus, grid), "tangential", 0.02)
    chain = DecChain.from_operators(ops)
    rng = np.random.default_rng(6)

    forms = [DiscreteForm(1, rng.standard_normal(chain.d0.shape[0])) for _ in range(3)]
    harmonic = np.column_stack([decompose(form, chain, tol=CG_TOL).harmonic for form in forms])
    singular = np.linalg.svd(harmonic, compute_uv=False)

    # one loop around the hole: β_1 = 1
    assert singular[0] > 1e-3 * np.linalg.norm(forms[0].values)
    assert singular[1] <= 1e-3 * singular[0]
