"""
Tests for mesh generation, statistics and file formats
"""

import numpy as np
import pytest

from afmflow.errors import MeshError
from afmflow.mesh import (TETMESH_HEADER, Mesh, dump_tetmesh, generate_box_mesh,
                          generate_disk_mesh, import_mesh, load_tetmesh, mesh_stats,
                          read_gmsh_msh2, signed_volumes, write_gmsh_msh2)


def test_single_cell_box():
    mesh = generate_box_mesh(1, 1, 1)
    assert mesh.n_vertices == 8
    assert mesh.n_elements == 6
    assert mesh.total_volume == pytest.approx(1.0)
    assert mesh.name == "box_1x1x1"


def test_box_counts_and_volume():
    mesh = generate_box_mesh(3, 2, 4, lo=(0.0, -1.0, 0.0), hi=(1.5, 1.0, 2.0))
    assert mesh.n_vertices == 4 * 3 * 5
    assert mesh.n_elements == 6 * 3 * 2 * 4
    assert mesh.total_volume == pytest.approx(1.5 * 2.0 * 2.0)
    assert np.all(mesh.volumes > 0)


def test_box_vertex_order_is_x_fastest():
    mesh = generate_box_mesh(2, 2, 2)
    np.testing.assert_allclose(mesh.vertices[1], [0.5, 0.0, 0.0])
    np.testing.assert_allclose(mesh.vertices[3], [0.0, 0.5, 0.0])
    np.testing.assert_allclose(mesh.vertices[9], [0.0, 0.0, 0.5])


def test_box_boundary_faces():
    mesh = generate_box_mesh(2, 2, 2)
    # two triangles per boundary square
    assert len(mesh.boundary_faces) == 6 * 4 * 2


@pytest.mark.parametrize("counts", [(0, 1, 1), (1, -2, 1), (1.5, 1, 1)])
def test_box_rejects_bad_counts(counts):
    with pytest.raises(MeshError):
        generate_box_mesh(*counts)


def test_box_rejects_degenerate_bounds():
    with pytest.raises(MeshError):
        generate_box_mesh(1, 1, 1, lo=(0, 0, 0), hi=(1, 0, 1))


def test_mesh_reorients_negative_elements():
    vertices = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    mesh = Mesh(vertices, [[0, 2, 1, 3]])
    assert signed_volumes(mesh.vertices, mesh.elements)[0] > 0
    assert mesh.total_volume == pytest.approx(1.0 / 6.0)


def test_mesh_rejects_degenerate_element():
    vertices = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 0, 1]], dtype=float)
    with pytest.raises(MeshError, match="degenerate"):
        Mesh(vertices, [[0, 1, 2, 3]])


def test_mesh_rejects_bad_index():
    vertices = np.eye(3)
    with pytest.raises(MeshError):
        Mesh(np.vstack([vertices, np.zeros(3)]), [[0, 1, 2, 4]])


def test_disk_mesh_structure():
    mesh = generate_disk_mesh(30.0, 1.0, n_radial=4, n_layers=2)
    n2d = 1 + sum(6 * r for r in range(1, 5))
    n_triangles = sum(6 * (2 * r - 1) for r in range(1, 5))
    assert mesh.n_vertices == 3 * n2d
    assert mesh.n_elements == 3 * 2 * n_triangles
    assert np.all(mesh.volumes > 0)
    assert mesh.vertices[:, 2].min() == pytest.approx(-0.5)
    assert mesh.vertices[:, 2].max() == pytest.approx(0.5)


def test_disk_volume_approaches_cylinder():
    coarse = generate_disk_mesh(1.0, 1.0, n_radial=4, n_layers=1)
    fine = generate_disk_mesh(1.0, 1.0, n_radial=16, n_layers=1)
    assert coarse.total_volume < fine.total_volume < np.pi
    assert fine.total_volume == pytest.approx(np.pi, rel=1e-2)


def test_disk_rejects_bad_input():
    with pytest.raises(MeshError):
        generate_disk_mesh(0.0, 1.0, 4, 1)
    with pytest.raises(MeshError):
        generate_disk_mesh(1.0, 1.0, 1, 1)


def test_mesh_stats():
    stats = mesh_stats(generate_box_mesh(2, 2, 2))
    assert stats.h_max == pytest.approx(0.5 * np.sqrt(3.0))
    assert stats.h_min == pytest.approx(0.5 * np.sqrt(3.0))
    assert stats.total_volume == pytest.approx(1.0)
    assert stats.shape_regularity > 1.0


def test_gmsh_round_trip(tmp_path):
    mesh = generate_box_mesh(2, 1, 1)
    path = write_gmsh_msh2(mesh, tmp_path / "box.msh")
    loaded, skipped = read_gmsh_msh2(path)
    assert skipped == 0
    assert loaded.same_as(mesh)
    assert import_mesh(path).n_elements == mesh.n_elements


def test_gmsh_skips_surface_elements(tmp_path):
    path = tmp_path / "tet.msh"
    path.write_text(
        "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n"
        "$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n$EndNodes\n"
        "$Elements\n2\n1 2 2 1 1 1 2 3\n2 4 2 1 1 1 2 3 4\n$EndElements\n")
    mesh, skipped = read_gmsh_msh2(path)
    assert skipped == 1
    assert mesh.n_elements == 1


def test_gmsh_error_reports_line(tmp_path):
    path = tmp_path / "bad.msh"
    path.write_text(
        "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n"
        "$Nodes\n2\n1 0 0 0\n2 x 0 0\n$EndNodes\n")
    with pytest.raises(MeshError) as info:
        read_gmsh_msh2(path)
    assert info.value.line == 7


def test_gmsh_rejects_binary(tmp_path):
    path = tmp_path / "binary.msh"
    path.write_text("$MeshFormat\n2.2 1 8\n$EndMeshFormat\n")
    with pytest.raises(MeshError, match="binary"):
        read_gmsh_msh2(path)


def test_gmsh_unknown_node(tmp_path):
    path = tmp_path / "dangling.msh"
    path.write_text(
        "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n"
        "$Nodes\n3\n1 0 0 0\n2 1 0 0\n3 0 1 0\n$EndNodes\n"
        "$Elements\n1\n1 4 2 1 1 1 2 3 9\n$EndElements\n")
    with pytest.raises(MeshError, match="unknown node"):
        read_gmsh_msh2(path)


def test_tetmesh_round_trip(tmp_path):
    mesh = generate_disk_mesh(2.0, 0.5, 3, 1)
    path = dump_tetmesh(mesh, tmp_path / "disk.tetmesh")
    assert path.read_text().splitlines()[0] == TETMESH_HEADER
    loaded = load_tetmesh(path)
    assert loaded.same_as(mesh)
    assert import_mesh(path, format="tetmesh").n_vertices == mesh.n_vertices


def test_tetmesh_bad_header(tmp_path):
    path = tmp_path / "bad.tetmesh"
    path.write_text("TETMESH v0\n0\n")
    with pytest.raises(MeshError) as info:
        load_tetmesh(path)
    assert info.value.line == 1


def test_unknown_import_format(tmp_path):
    with pytest.raises(MeshError):
        import_mesh(tmp_path / "x.vtu", format="vtu")
