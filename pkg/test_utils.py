"""
Tests for VTK snapshots, CSV traces, JSON helpers and the run manifest
"""

import json

import numpy as np
import pytest

from afmflow.errors import ConfigError, MeshError
from afmflow.fields import SublatticePair
from afmflow.gradient_flow import minimize
from afmflow.mesh import generate_box_mesh
from afmflow.fem_core import FESpace
from afmflow.models.diagnostics import TRACE_COLUMNS
from afmflow.models.scheme import FlowConfig
from afmflow.utils import (format_seconds, load_json, read_trace, read_vtk, save_json,
                           write_manifest, write_trace, write_vtk)


def antiparallel_pair(space):
    m = np.tile([0.0, 0.0, 1.0], (space.n, 1))
    return SublatticePair(space, m, -m)


def test_vtk_single_cell(tmp_path):
    mesh = generate_box_mesh(1, 1, 1)
    pair = antiparallel_pair(FESpace(mesh))
    path = write_vtk(mesh, pair, path=tmp_path / "cell.vtk")
    text = path.read_text().splitlines()
    assert text[0] == "# vtk DataFile Version 3.0"
    assert "POINTS 8 double" in text
    assert "CELLS 6 30" in text
    assert "CELL_TYPES 6" in text

    data = read_vtk(path)
    assert data["points"].shape == (8, 3)
    assert data["cells"].shape == (6, 4)
    assert np.all(data["cell_types"] == 10)
    np.testing.assert_allclose(data["vectors"]["m1"], pair.m1)
    np.testing.assert_allclose(data["vectors"]["m_total"], 0.0)


def test_vtk_total_uses_saturation_ratios(tmp_path, space):
    pair = antiparallel_pair(space)
    data = read_vtk(write_vtk(space.mesh, pair, eta_s=(1.0, 0.5), path=tmp_path / "s.vtk"))
    np.testing.assert_allclose(data["vectors"]["m_total"], np.tile([0.0, 0.0, 0.5], (space.n, 1)))


def test_vtk_round_trip_is_exact(tmp_path, pair):
    data = read_vtk(write_vtk(pair.space.mesh, pair, path=tmp_path / "r.vtk"))
    np.testing.assert_array_equal(data["vectors"]["m2"], pair.m2)
    np.testing.assert_array_equal(data["points"], pair.space.mesh.vertices)


def test_read_vtk_rejects_other_files(tmp_path):
    path = tmp_path / "x.vtk"
    path.write_text("hello\nworld\nASCII\n")
    with pytest.raises(MeshError):
        read_vtk(path)
    path.write_text("# vtk DataFile Version 3.0\nt\nBINARY\n")
    with pytest.raises(MeshError):
        read_vtk(path)


def test_empty_trace_writes_header_only(tmp_path):
    path = write_trace([], tmp_path / "trace.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 1
    assert lines[0].split(",") == TRACE_COLUMNS


def test_trace_round_trip(tmp_path, toy, toy_initial):
    result = minimize(toy_initial, toy, FlowConfig.preset("decoupled", max_steps=5))
    frame = read_trace(write_trace(result.trace, tmp_path / "trace.csv"))
    assert list(frame["step"]) == [0, 1, 2, 3, 4]
    assert frame["E_total"].iloc[-1] == result.trace[-1].energy_after.total
    assert frame["E_total"].is_monotonic_decreasing


def test_read_trace_requires_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("step,time\n0,0.1\n")
    with pytest.raises(ConfigError):
        read_trace(path)


def test_load_json_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{\"a\": 1,,}")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_json(bad)
    listed = tmp_path / "list.json"
    listed.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_json(listed)


def test_save_json_handles_numpy(tmp_path):
    path = save_json({"v": np.arange(3), "x": np.float64(0.5)}, tmp_path / "out" / "a.json")
    assert load_json(path) == {"v": [0, 1, 2], "x": 0.5}


def test_manifest(tmp_path):
    path = write_manifest(tmp_path, {"name": "demo"}, {"tau": 1e-3}, {"reason": "converged"},
                          ["trace.csv"])
    manifest = json.loads(path.read_text())
    assert manifest["config"]["name"] == "demo"
    assert manifest["summary"]["reason"] == "converged"
    assert set(manifest["versions"]) >= {"afmflow", "numpy", "scipy", "pandas", "python"}


def test_format_seconds():
    assert format_seconds(2e-15) == "2 fs"
    assert format_seconds(1.5e-9) == "1.5 ns"
    assert format_seconds(40e-12) == "40 ps"
