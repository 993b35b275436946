"""
Utility functions for VTK snapshots, CSV traces, JSON configs and manifests
"""

import json
import logging
import platform
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import numpy as np
import pandas as pd
import scipy

from . import __version__
from .errors import ConfigError, MeshError
from .fields import SublatticePair
from .mesh import Mesh
from .models.diagnostics import TRACE_COLUMNS, StepDiagnostics

logger = logging.getLogger(__name__)

VTK_TETRA = 10


def write_vtk(mesh: Mesh, pair: SublatticePair, eta_s=(1.0, 1.0), path="snapshot.vtk",
              title: str = "afmflow snapshot") -> Path:
    """
    Write a legacy ASCII VTK 3.0 unstructured grid with point vectors
    m1, m2 and m_total = eta_s1 m1 + eta_s2 m2
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n, ne = mesh.n_vertices, mesh.n_elements
    fields = {"m1": pair.m1, "m2": pair.m2, "m_total": pair.total(*eta_s)}

    lines = ["# vtk DataFile Version 3.0", title.replace("\n", " ")[:255], "ASCII",
             "DATASET UNSTRUCTURED_GRID", f"POINTS {n} double"]
    lines += [" ".join(repr(float(c)) for c in row) for row in mesh.vertices]
    lines.append(f"CELLS {ne} {5 * ne}")
    lines += ["4 " + " ".join(str(int(i)) for i in tet) for tet in mesh.elements]
    lines.append(f"CELL_TYPES {ne}")
    lines += [str(VTK_TETRA)] * ne
    lines.append(f"POINT_DATA {n}")
    for name, values in fields.items():
        lines.append(f"VECTORS {name} double")
        lines += [" ".join(repr(float(c)) for c in row) for row in values]

    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info("Wrote VTK snapshot %s (%d points, %d cells)", path, n, ne)
    return path


def read_vtk(path) -> Dict:
    """
    Parse a legacy ASCII unstructured grid written by write_vtk. Returns
    points, cells, cell_types and a dict of point vectors.
    """
    path = Path(path)
    tokens = path.read_text(encoding="utf-8").split("\n")
    if not tokens or not tokens[0].startswith("# vtk DataFile Version"):
        raise MeshError("not a legacy VTK file", line=1)
    if tokens[2].strip() != "ASCII":
        raise MeshError("only ASCII VTK is supported", line=3)

    out = {"title": tokens[1], "vectors": {}}
    pos = 3
    n_points = 0

    def block(count, width, dtype, start):
        try:
            rows = [tokens[start + k].split() for k in range(count)]
            return np.array(rows, dtype=dtype).reshape(count, width)
        except (IndexError, ValueError) as e:
            raise MeshError(f"malformed data block ({e})", line=start + 1) from None

    while pos < len(tokens):
        parts = tokens[pos].split()
        pos += 1
        if not parts:
            continue
        key = parts[0]
        if key == "DATASET" and parts[1] != "UNSTRUCTURED_GRID":
            raise MeshError(f"unsupported dataset {parts[1]}", line=pos)
        if key == "POINTS":
            n_points = int(parts[1])
            out["points"] = block(n_points, 3, float, pos)
            pos += n_points
        elif key == "CELLS":
            count = int(parts[1])
            cells = block(count, 5, int, pos)
            if np.any(cells[:, 0] != 4):
                raise MeshError("only tetrahedral cells are supported", line=pos + 1)
            out["cells"] = cells[:, 1:]
            pos += count
        elif key == "CELL_TYPES":
            count = int(parts[1])
            out["cell_types"] = block(count, 1, int, pos).ravel()
            pos += count
        elif key == "VECTORS":
            out["vectors"][parts[1]] = block(n_points, 3, float, pos)
            pos += n_points
    return out


def trace_frame(trace: Iterable[StepDiagnostics]) -> pd.DataFrame:
    rows = [d.to_row() for d in trace]
    return pd.DataFrame(rows, columns=TRACE_COLUMNS)


def write_trace(trace: Iterable[StepDiagnostics], path) -> Path:
    """CSV with one row per step; header only for an empty run"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = trace_frame(trace)
    frame.to_csv(path, index=False, float_format="%.17g")
    logger.info("Wrote trace %s (%d rows)", path, len(frame))
    return path


def read_trace(path) -> pd.DataFrame:
    frame = pd.read_csv(path)
    missing = [c for c in TRACE_COLUMNS if c not in frame.columns]
    if missing:
        raise ConfigError(f"trace {path} lacks columns: {', '.join(missing)}")
    return frame


def _to_jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if hasattr(value, "to_dict"):
        return value.to_dict()
    return str(value)


def load_json(file_path) -> Dict:
    """
    Load a JSON document; missing files and parse errors become ConfigError
    """
    try:
        with open(file_path, "r", encoding="utf-8") as file:
            data = json.load(file)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {file_path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON in {file_path}: line {e.lineno}: {e.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{file_path}: top level must be an object")
    return data


def save_json(data: Dict, file_path) -> Path:
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as file:
        json.dump(data, file, indent=2, default=_to_jsonable)
    return path


def environment_versions() -> Dict[str, str]:
    return {
        "afmflow": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
    }


def write_manifest(out_dir, config: Dict, derived: Optional[Dict] = None,
                   summary: Optional[Dict] = None, outputs: Optional[List[str]] = None) -> Path:
    """Config echo, derived parameters, summary and package versions"""
    manifest = {
        "config": config,
        "derived": derived or {},
        "summary": summary or {},
        "outputs": outputs or [],
        "versions": environment_versions(),
    }
    path = save_json(manifest, Path(out_dir) / "manifest.json")
    logger.info("Wrote manifest %s", path)
    return path


def format_energy(value: float) -> str:
    return f"{value:.10g}"


def format_seconds(t: float) -> str:
    """Human-readable physical time"""
    for unit, scale in (("ns", 1e-9), ("ps", 1e-12), ("fs", 1e-15)):
        if abs(t) >= scale:
            return f"{t / scale:.4g} {unit}"
    return f"{t:.4g} s"
