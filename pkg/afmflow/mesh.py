"""
Tetrahedral Mesh Generation and Import
Structured Kuhn-split boxes, extruded ring-pattern disks, Gmsh MSH 2.2 and TETMESH dumps
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import List, Tuple

import numpy as np

from .errors import MeshError
from .models.diagnostics import MeshStats

logger = logging.getLogger(__name__)

GMSH_TET = 4
TETMESH_HEADER = "TETMESH v1"

# Faces of a tetrahedron, each opposite the local vertex with the same index
LOCAL_FACES = np.array([[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]])


def signed_volumes(vertices: np.ndarray, elements: np.ndarray) -> np.ndarray:
    """Signed volume det[x1-x0, x2-x0, x3-x0]/6 of every element"""
    x = vertices[elements]
    edges = x[:, 1:, :] - x[:, :1, :]
    return np.linalg.det(edges) / 6.0


@dataclass(frozen=True, eq=False)
class Mesh:
    """
    Immutable tetrahedral mesh. Elements are stored positively oriented;
    construction swaps two vertices of any element with negative signed volume.
    """
    vertices: np.ndarray
    elements: np.ndarray
    name: str = field(default="mesh", compare=False)

    def __post_init__(self):
        vertices = np.ascontiguousarray(self.vertices, dtype=float)
        elements = np.array(self.elements, dtype=np.int64, copy=True)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise MeshError(f"vertices must have shape (N, 3), got {vertices.shape}")
        if elements.size == 0:
            raise MeshError("mesh has no tetrahedral elements")
        if elements.ndim != 2 or elements.shape[1] != 4:
            raise MeshError(f"elements must have shape (E, 4), got {elements.shape}")
        if elements.min() < 0 or elements.max() >= len(vertices):
            raise MeshError("element references a vertex index that does not exist")
        if not np.all(np.isfinite(vertices)):
            raise MeshError("vertex coordinates must be finite")

        vol = signed_volumes(vertices, elements)
        scale = np.ptp(vertices, axis=0).max() ** 3
        degenerate = np.abs(vol) <= 1e-14 * scale
        if np.any(degenerate):
            raise MeshError(f"{int(degenerate.sum())} degenerate element(s) with zero volume, "
                            f"first index {int(np.argmax(degenerate))}")
        flip = vol < 0
        if np.any(flip):
            logger.debug("Reoriented %d element(s)", int(flip.sum()))
            elements[flip, 2], elements[flip, 3] = elements[flip, 3].copy(), elements[flip, 2].copy()

        vertices.setflags(write=False)
        elements.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "elements", elements)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @cached_property
    def volumes(self) -> np.ndarray:
        vol = signed_volumes(self.vertices, self.elements)
        vol.setflags(write=False)
        return vol

    @property
    def total_volume(self) -> float:
        return float(self.volumes.sum())

    @cached_property
    def boundary_faces(self) -> np.ndarray:
        """Faces incident to exactly one element, as sorted vertex triples"""
        faces = np.sort(self.elements[:, LOCAL_FACES].reshape(-1, 3), axis=1)
        unique, counts = np.unique(faces, axis=0, return_counts=True)
        return unique[counts == 1]

    def same_as(self, other: "Mesh") -> bool:
        if self is other:
            return True
        return (self.vertices.shape == other.vertices.shape
                and self.elements.shape == other.elements.shape
                and np.array_equal(self.vertices, other.vertices)
                and np.array_equal(self.elements, other.elements))


def generate_box_mesh(nx: int, ny: int, nz: int, lo=(0.0, 0.0, 0.0), hi=(1.0, 1.0, 1.0)) -> Mesh:
    """
    Structured box mesh: nx*ny*nz cells, each split into 6 Kuhn tetrahedra
    along the paths from the lower to the upper cell corner. Vertex numbering
    runs x fastest, then y, then z.
    """
    counts = (nx, ny, nz)
    if any(int(n) != n or n < 1 for n in counts):
        raise MeshError(f"cell counts must be positive integers, got {counts}")
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.shape != (3,) or hi.shape != (3,) or np.any(hi <= lo):
        raise MeshError(f"degenerate box bounds lo={lo.tolist()} hi={hi.tolist()}")

    xs, ys, zs = (np.linspace(lo[d], hi[d], counts[d] + 1) for d in range(3))
    Z, Y, X = np.meshgrid(zs, ys, xs, indexing="ij")
    vertices = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])

    stride = np.array([1, nx + 1, (nx + 1) * (ny + 1)])
    k, j, i = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
    base = (i * stride[0] + j * stride[1] + k * stride[2]).ravel()

    paths = []
    for perm in itertools.permutations(range(3)):
        steps = np.cumsum(stride[list(perm)])
        paths.append(np.concatenate([[0], steps]))
    paths = np.array(paths)                      # (6, 4) index offsets
    elements = (base[:, None, None] + paths[None, :, :]).reshape(-1, 4)

    mesh = Mesh(vertices, elements, name=f"box_{nx}x{ny}x{nz}")
    logger.debug("Generated box mesh with %d vertices and %d elements",
                 mesh.n_vertices, mesh.n_elements)
    return mesh


def _ring_points(n_radial: int, radius: float) -> Tuple[np.ndarray, List[np.ndarray]]:
    points = [np.zeros((1, 2))]
    rings = [np.array([0])]
    offset = 1
    for r in range(1, n_radial + 1):
        n = 6 * r
        angles = 2.0 * np.pi * np.arange(n) / n
        rho = radius * r / n_radial
        points.append(np.column_stack([rho * np.cos(angles), rho * np.sin(angles)]))
        rings.append(offset + np.arange(n))
        offset += n
    return np.vstack(points), rings


def _merge_rings(inner: np.ndarray, outer: np.ndarray) -> List[Tuple[int, int, int]]:
    """Triangulate the annulus between two rings by merging their angle sequences"""
    if len(inner) == 1:
        n = len(outer)
        return [(inner[0], outer[j], outer[(j + 1) % n]) for j in range(n)]
    n_in, n_out = len(inner), len(outer)
    triangles = []
    i = j = 0
    while i < n_in or j < n_out:
        next_in = (i + 1) / n_in
        next_out = (j + 1) / n_out
        if j < n_out and (i == n_in or next_out <= next_in):
            triangles.append((inner[i % n_in], outer[j], outer[(j + 1) % n_out]))
            j += 1
        else:
            triangles.append((inner[i], outer[j % n_out], inner[(i + 1) % n_in]))
            i += 1
    return triangles


def generate_disk_mesh(radius: float, thickness: float, n_radial: int, n_layers: int) -> Mesh:
    """
    Polygonal disk centred at the origin, z in [-thickness/2, thickness/2].

    Ring r of the planar pattern carries 6r points at radius r*radius/n_radial;
    neighbouring rings are joined by merging their angles. Each extruded prism
    is split into 3 tetrahedra using the global vertex order, so that shared
    quadrilateral faces are cut along the same diagonal.
    """
    if not radius > 0 or not thickness > 0:
        raise MeshError("disk radius and thickness must be positive")
    if n_radial < 2 or n_layers < 1:
        raise MeshError(f"need n_radial >= 2 and n_layers >= 1, got {n_radial}, {n_layers}")

    points, rings = _ring_points(n_radial, radius)
    triangles = []
    for inner, outer in zip(rings[:-1], rings[1:]):
        triangles.extend(_merge_rings(inner, outer))
    triangles = np.sort(np.array(triangles, dtype=np.int64), axis=1)

    n2d = len(points)
    zs = np.linspace(-thickness / 2.0, thickness / 2.0, n_layers + 1)
    vertices = np.vstack([np.column_stack([points, np.full(n2d, z)]) for z in zs])

    elements = []
    for layer in range(n_layers):
        a, b, c = (triangles[:, d] + layer * n2d for d in range(3))
        at, bt, ct = a + n2d, b + n2d, c + n2d
        elements.append(np.column_stack([a, b, c, ct]))
        elements.append(np.column_stack([a, b, bt, ct]))
        elements.append(np.column_stack([a, at, bt, ct]))
    elements = np.vstack(elements)

    mesh = Mesh(vertices, elements, name=f"disk_r{radius:g}_t{thickness:g}")
    deficit = np.pi * radius ** 2 * thickness - mesh.total_volume
    logger.info("Disk mesh: %d vertices, %d elements, volume deficit %.4g (%.3g%%)",
                mesh.n_vertices, mesh.n_elements, deficit,
                100.0 * deficit / (np.pi * radius ** 2 * thickness))
    return mesh


def mesh_stats(mesh: Mesh) -> MeshStats:
    """Element diameters, shape regularity and volume of a mesh"""
    x = mesh.vertices[mesh.elements]
    pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    lengths = np.stack([np.linalg.norm(x[:, p] - x[:, q], axis=1) for p, q in pairs], axis=1)
    diameters = lengths.max(axis=1)

    face_pts = x[:, LOCAL_FACES]                 # (E, 4, 3, 3)
    cross = np.cross(face_pts[:, :, 1] - face_pts[:, :, 0], face_pts[:, :, 2] - face_pts[:, :, 0])
    surface = 0.5 * np.linalg.norm(cross, axis=2).sum(axis=1)
    inradius = 3.0 * mesh.volumes / surface

    return MeshStats(
        h_max=float(diameters.max()),
        h_min=float(diameters.min()),
        shape_regularity=float((diameters / inradius).max()),
        n_vertices=mesh.n_vertices,
        n_elements=mesh.n_elements,
        total_volume=mesh.total_volume,
    )


def _next_line(lines, pos: int, what: str) -> Tuple[str, int]:
    if pos >= len(lines):
        raise MeshError(f"unexpected end of file while reading {what}", line=pos + 1)
    return lines[pos].strip(), pos + 1


def read_gmsh_msh2(path) -> Tuple[Mesh, int]:
    """
    Parse a Gmsh MSH 2.2 ASCII file.
    Returns the mesh of its tetrahedra and the number of skipped non-tet elements.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise MeshError(f"cannot read mesh file {path}: {e}") from e

    node_ids = {}
    vertices = []
    tets = []
    skipped = 0
    seen_format = False
    pos = 0
    while pos < len(lines):
        line, pos = lines[pos].strip(), pos + 1
        if line == "$MeshFormat":
            header, pos = _next_line(lines, pos, "$MeshFormat")
            parts = header.split()
            if len(parts) < 3 or not parts[0].startswith("2"):
                raise MeshError(f"unsupported mesh format '{header}', expected 2.2 0 8", line=pos)
            if parts[1] != "0":
                raise MeshError("binary MSH files are not supported", line=pos)
            seen_format = True
        elif line == "$Nodes":
            count_line, pos = _next_line(lines, pos, "$Nodes")
            try:
                count = int(count_line)
            except ValueError:
                raise MeshError(f"bad node count '{count_line}'", line=pos) from None
            for _ in range(count):
                row, pos = _next_line(lines, pos, "$Nodes")
                parts = row.split()
                try:
                    node_ids[int(parts[0])] = len(vertices)
                    vertices.append([float(v) for v in parts[1:4]])
                except (ValueError, IndexError):
                    raise MeshError(f"bad node line '{row}'", line=pos) from None
        elif line == "$Elements":
            count_line, pos = _next_line(lines, pos, "$Elements")
            try:
                count = int(count_line)
            except ValueError:
                raise MeshError(f"bad element count '{count_line}'", line=pos) from None
            for _ in range(count):
                row, pos = _next_line(lines, pos, "$Elements")
                try:
                    parts = [int(v) for v in row.split()]
                    elm_type, n_tags = parts[1], parts[2]
                except (ValueError, IndexError):
                    raise MeshError(f"bad element line '{row}'", line=pos) from None
                if elm_type != GMSH_TET:
                    skipped += 1
                    continue
                nodes = parts[3 + n_tags:]
                if len(nodes) != 4:
                    raise MeshError(f"tetrahedron with {len(nodes)} nodes", line=pos)
                try:
                    tets.append([node_ids[n] for n in nodes])
                except KeyError as e:
                    raise MeshError(f"element references unknown node {e.args[0]}", line=pos) from None

    if not seen_format:
        raise MeshError("missing $MeshFormat section")
    if not tets:
        raise MeshError(f"no tetrahedra found in {path}")
    if skipped:
        logger.warning("Skipped %d non-tetrahedral element(s) in %s", skipped, path)
    return Mesh(np.array(vertices), np.array(tets), name=path.stem), skipped


def import_mesh(path, format: str = "gmsh_msh2_ascii") -> Mesh:
    if format == "gmsh_msh2_ascii":
        return read_gmsh_msh2(path)[0]
    if format == "tetmesh":
        return load_tetmesh(path)
    raise MeshError(f"unknown mesh format '{format}'")


def write_gmsh_msh2(mesh: Mesh, path) -> Path:
    """Write a mesh as Gmsh MSH 2.2 ASCII with 1-based node and element ids"""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        f.write("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n")
        f.write(f"$Nodes\n{mesh.n_vertices}\n")
        for i, (x, y, z) in enumerate(mesh.vertices, start=1):
            f.write(f"{i} {float(x)!r} {float(y)!r} {float(z)!r}\n")
        f.write("$EndNodes\n")
        f.write(f"$Elements\n{mesh.n_elements}\n")
        for e, tet in enumerate(mesh.elements + 1, start=1):
            f.write(f"{e} {GMSH_TET} 2 1 1 {tet[0]} {tet[1]} {tet[2]} {tet[3]}\n")
        f.write("$EndElements\n")
    return path


def dump_tetmesh(mesh: Mesh, path) -> Path:
    """Canonical plain-text dump with 0-based indices"""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{TETMESH_HEADER}\n{mesh.n_vertices}\n")
        for x, y, z in mesh.vertices:
            f.write(f"{float(x)!r} {float(y)!r} {float(z)!r}\n")
        f.write(f"{mesh.n_elements}\n")
        for tet in mesh.elements:
            f.write(" ".join(str(int(v)) for v in tet) + "\n")
    return path


def load_tetmesh(path) -> Mesh:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != TETMESH_HEADER:
        raise MeshError(f"expected header '{TETMESH_HEADER}'", line=1)
    try:
        n_vertices = int(lines[1])
        vertices = np.array([[float(v) for v in lines[2 + i].split()] for i in range(n_vertices)])
        pos = 2 + n_vertices
        n_elements = int(lines[pos])
        elements = np.array([[int(v) for v in lines[pos + 1 + e].split()] for e in range(n_elements)])
    except (ValueError, IndexError) as e:
        raise MeshError(f"malformed TETMESH file {path}: {e}") from e
    return Mesh(vertices.reshape(-1, 3), elements.reshape(-1, 4), name=path.stem)
