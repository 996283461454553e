import pytest
import sys
import os

from fastapi.testclient import TestClient

sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

import spectra_service
from eigensolver import EigenSolveError
from settings import reset_settings
from server import app

client = TestClient(app)

FIG_DISK = {"shape": "disk", "R": 1.0, "lg": 1.0, "grid": "fig-example"}


# ── Service info ───────────────────────────────────────────────────────────────

def test_root():
    body = client.get("/").json()
    assert body["service"] == "gridhodge API"
    assert body["status"] == "running"


def test_health():
    assert client.get("/healthz").json() == {"ok": True}


def test_shape_catalogue():
    shapes = {item["kind"]: item["dimensions"] for item in client.get("/api/spectra/shapes").json()}
    assert shapes["torus"] == ["R_major", "r_minor"]
    assert set(shapes) == {"disk", "square", "ball", "cube", "cuboid", "torus", "spherical_shell"}


# ── Spectra ────────────────────────────────────────────────────────────────────

def test_eigenvalues_endpoint():
    response = client.post("/api/spectra/eigenvalues", json={**FIG_DISK, "kind": "big", "m": 4})
    assert response.status_code == 200
    body = response.json()
    assert body["eigenvalues"] == pytest.approx([2.0, 4.0, 4.0, 6.0], abs=1e-12)
    assert body["multiplicity_groups"] == [0, 1, 1, 2]
    assert body["kernel_dim"] == 0
    assert body["size"] == 4
    assert body["method"] == "dense"


def test_exact_endpoint():
    response = client.post("/api/spectra/exact", json={"shape": "square", "a": 3.0, "m": 4})
    assert response.status_code == 200
    assert response.json()["eigenvalues"] == pytest.approx([2.1932, 5.4831, 5.4831, 8.773], abs=5e-4)


def test_betti_endpoint():
    response = client.post("/api/spectra/betti", json={"shape": "disk", "R": 1.0, "lg": 0.25})
    assert response.status_code == 200
    body = response.json()
    assert body["betti"] == [1, 0]
    assert body["source"] == "grid"


# ── Errors ─────────────────────────────────────────────────────────────────────

def test_invalid_body_is_rejected():
    response = client.post("/api/spectra/eigenvalues", json={**FIG_DISK, "eps": 2.0})
    assert response.status_code == 422


def test_file_inputs_are_command_line_only():
    response = client.post("/api/spectra/betti", json={"mesh": "/etc/passwd"})
    assert response.status_code == 422
    assert "command line" in response.json()["detail"]


def test_missing_closed_form_is_unprocessable():
    response = client.post("/api/spectra/exact", json={"shape": "torus", "R_major": 1.0, "r_minor": 0.3})
    assert response.status_code == 422
    assert "torus" in response.json()["detail"]


def test_solver_failure_is_server_error(monkeypatch):
    def failing(config):
        raise EigenSolveError("residual bound 1e-09 violated (worst 0.1)")

    monkeypatch.setattr(spectra_service, "run_spectra", failing)
    response = client.post("/api/spectra/eigenvalues", json=FIG_DISK)
    assert response.status_code == 500
    assert response.json()["detail"].startswith("EigenSolveError")


def test_oversized_grid_is_refused_before_sampling(monkeypatch):
    def never(config):
        raise AssertionError("the solve must not start")

    monkeypatch.setattr(spectra_service, "run_spectra", never)
    response = client.post("/api/spectra/eigenvalues", json={"shape": "ball", "R": 1.0, "lg": 0.02})
    assert response.status_code == 422
    assert "vertices" in response.json()["detail"]


def test_vertex_cap_follows_settings(monkeypatch):
    monkeypatch.setenv("GRIDHODGE_HTTP_MAX_VERTICES", "10")
    reset_settings()
    response = client.post("/api/spectra/betti", json={"shape": "disk", "R": 1.0, "lg": 0.25})
    assert response.status_code == 422
    assert "limited to 10" in response.json()["detail"]
    # closed forms sample no grid
    assert client.post("/api/spectra/exact", json={"shape": "square", "a": 3.0, "m": 2}).status_code == 200
