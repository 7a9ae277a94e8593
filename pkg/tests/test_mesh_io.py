"""Mesh file readers and writers: stmesh, Gmsh 2.2, space-time import."""

import numpy as np
import pytest

from stflow.cases import structured_rectangle
from stflow.errors import NegativeVolumeElement, NonConformingMesh, ParseError
from stflow.mesh import subdivide_sst, validate_conformity
from stflow.mesh_io import (
    import_ust,
    read_gmsh22,
    read_spatial_mesh,
    read_stmesh_spatial,
    write_stmesh_slab,
    write_stmesh_spatial,
)

STMESH_SQUARE = """\
# two triangles on the unit square
stmesh 2 4 2 4
0 0 0
1 1 0
2 1 1
3 0 1
0 0 1 2
1 0 2 3
bottom 0 1
right 1 2
top 2 3
left 3 0
"""


def write(tmp_path, text, name="mesh.stmesh"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_read_stmesh_spatial(tmp_path):
    mesh = read_stmesh_spatial(write(tmp_path, STMESH_SQUARE))
    assert mesh.n_nodes == 4
    assert mesh.n_elements == 2
    assert mesh.boundary_tags() == ["bottom", "left", "right", "top"]
    assert mesh.element_volumes().sum() == pytest.approx(1.0)


def test_spatial_round_trip(tmp_path):
    mesh = structured_rectangle(0.0, 2.0, -1.0, 1.0, 3, 2)
    path = tmp_path / "rt.stmesh"
    write_stmesh_spatial(path, mesh)
    back = read_stmesh_spatial(path)
    assert np.array_equal(back.elements, mesh.elements)
    assert np.allclose(back.nodes, mesh.nodes, atol=0.0)
    assert back.facet_tags == mesh.facet_tags


def test_slab_round_trip(tmp_path):
    spatial = structured_rectangle(0.0, 1.0, 0.0, 1.0, 2, 2)
    slab = subdivide_sst(spatial, 0.0, 0.5)
    path = tmp_path / "slab.stmesh"
    write_stmesh_slab(path, slab)
    back = import_ust(path)
    assert back.n_nodes == slab.n_nodes
    assert back.n_elements == slab.n_elements
    assert back.t_lo == 0.0 and back.t_hi == 0.5
    assert np.array_equal(np.sort(back.lower_nodes), np.sort(slab.lower_nodes))
    assert np.array_equal(np.sort(back.upper_nodes), np.sort(slab.upper_nodes))
    assert validate_conformity(back).bad_facets == []


@pytest.mark.parametrize("mutation, message", [
    ("", "empty file"),
    ("stmesh 2 4 2\n", "expected header"),
    ("stmesh 9 4 2 4\n", "unsupported dimension"),
    ("stmesh 2 x 2 4\n", "non-integer"),
])
def test_parse_errors_header(tmp_path, mutation, message):
    with pytest.raises(ParseError, match=message):
        read_stmesh_spatial(write(tmp_path, mutation))


def test_parse_error_reports_line_number(tmp_path):
    bad = STMESH_SQUARE.replace("0 0 1 2", "0 0 1 99")
    with pytest.raises(ParseError, match="unknown node") as err:
        read_stmesh_spatial(write(tmp_path, bad))
    assert err.value.line is not None


def test_parse_error_truncated(tmp_path):
    lines = STMESH_SQUARE.splitlines()[:5]
    with pytest.raises(ParseError, match="end of file"):
        read_stmesh_spatial(write(tmp_path, "\n".join(lines)))


def test_parse_error_duplicate_node_id(tmp_path):
    bad = STMESH_SQUARE.replace("3 0 1", "2 0 1")
    with pytest.raises(ParseError, match="missing node ids"):
        read_stmesh_spatial(write(tmp_path, bad))


GMSH_SQUARE = """\
$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
6
1 1 2 10 1 1 2
2 1 2 11 2 2 3
3 1 2 12 3 3 4
4 1 2 13 4 4 1
5 2 2 1 1 1 2 3
6 2 2 1 1 1 3 4
$EndElements
"""


def test_read_gmsh22(tmp_path):
    path = write(tmp_path, GMSH_SQUARE, "square.msh")
    mesh = read_gmsh22(path)
    assert mesh.dim == 2
    assert mesh.n_nodes == 4
    assert mesh.n_elements == 2
    assert sorted(mesh.facet_tags) == ["10", "11", "12", "13"]
    assert mesh.element_volumes().sum() == pytest.approx(1.0)


def test_read_spatial_mesh_dispatch(tmp_path):
    g = read_spatial_mesh(write(tmp_path, GMSH_SQUARE, "a.msh"))
    s = read_spatial_mesh(write(tmp_path, STMESH_SQUARE, "a.stmesh"))
    assert g.n_elements == s.n_elements == 2


def test_read_gmsh_rejects_other_versions(tmp_path):
    bad = GMSH_SQUARE.replace("2.2 0 8", "4.1 0 8")
    with pytest.raises(ParseError, match="2.2"):
        read_gmsh22(write(tmp_path, bad, "bad.msh"))


# ---------------------------------------------------------------------------
# space-time import


UST_TRIANGLES = """\
stmesh 2 4 2 4
0 0 0
1 1 0
2 1 1
3 0 1
0 0 1 2
1 0 2 3
lower 0 1
right 1 2
upper 2 3
left 3 0
"""


def test_import_ust_basic(tmp_path):
    mesh = import_ust(write(tmp_path, UST_TRIANGLES))
    assert mesh.element_type == "simplex"
    assert mesh.t_lo == 0.0 and mesh.t_hi == 1.0
    assert np.array_equal(mesh.lower_nodes, [0, 1])
    assert np.array_equal(mesh.upper_nodes, [2, 3])
    assert mesh.lateral_facet_tags == ["right", "left"]
    # elements reoriented to positive determinant
    for elem in mesh.elements:
        jac = (mesh.nodes[elem[1:]] - mesh.nodes[elem[0]]).T
        assert np.linalg.det(jac) > 0.0


def test_import_ust_duplicate_elements(tmp_path):
    bad = UST_TRIANGLES.replace("1 0 2 3", "1 2 0 1")
    with pytest.raises(NonConformingMesh, match="duplicate"):
        import_ust(write(tmp_path, bad))


def test_import_ust_degenerate_element(tmp_path):
    bad = UST_TRIANGLES.replace("2 1 1", "2 2 0")  # node 2 collinear with 0, 1
    with pytest.raises(NegativeVolumeElement):
        import_ust(write(tmp_path, bad))


def test_import_ust_facet_with_wrong_owner_count(tmp_path):
    # tag the interior diagonal (shared by both triangles) as a boundary facet
    bad = UST_TRIANGLES.replace("right 1 2", "right 0 2")
    with pytest.raises(NonConformingMesh, match="owners"):
        import_ust(write(tmp_path, bad))


def test_packaged_pulse_fixture_loads():
    from stflow.cli import pulse_ust_mesh

    mesh = pulse_ust_mesh()
    assert mesh.nsd == 1
    assert mesh.n_elements > 0
    assert len(mesh.lower_nodes) > 0 and len(mesh.upper_nodes) > 0
    assert mesh.t_lo == 0.0
    vols = mesh.element_volumes()
    assert vols.min() > 0.0
