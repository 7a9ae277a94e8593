"""Slab meshes: FST extrusion, SST subdivision, conformity, normals."""

import numpy as np
import pytest

from stflow.errors import DegenerateFacet, NonPositiveTimeStep, RefinementConflict
from stflow.cases import structured_interval, structured_rectangle
from stflow.mesh import (
    SpatialMesh,
    extrude_fst,
    facet_normal,
    generalized_cross,
    smooth_refinement_levels,
    subdivide_sst,
    validate_conformity,
)


def unit_square(nx=3, ny=2):
    return structured_rectangle(0.0, 1.0, 0.0, 1.0, nx, ny)


def random_spatial_mesh(rng, nx=None, ny=None, jitter=0.25):
    """Random conforming 2D mesh: jittered structured triangulation."""
    nx = nx or int(rng.integers(2, 7))
    ny = ny or int(rng.integers(2, 7))
    mesh = structured_rectangle(0.0, 1.0, 0.0, 1.0, nx, ny)
    interior = np.ones(mesh.n_nodes, dtype=bool)
    interior[np.unique(mesh.facet_nodes.ravel())] = False
    mesh.nodes[interior] += rng.uniform(
        -jitter, jitter, size=(interior.sum(), 2)) * [1.0 / nx, 1.0 / ny]
    return mesh


# ---------------------------------------------------------------------------
# FST extrusion


def test_extrude_counts_and_coordinates():
    spatial = unit_square()
    slab = extrude_fst(spatial, 0.0, 0.5)
    n = spatial.n_nodes
    assert slab.n_nodes == 2 * n
    assert slab.n_elements == spatial.n_elements
    assert slab.element_type == "prism"
    assert np.all(slab.nodes[:n, 2] == 0.0)
    assert np.all(slab.nodes[n:, 2] == 0.5)
    assert np.allclose(slab.nodes[:n, :2], spatial.nodes)
    assert np.array_equal(slab.node_column, np.concatenate([np.arange(n)] * 2))


def test_extrude_volume_balance():
    spatial = unit_square()
    slab = extrude_fst(spatial, 1.0, 1.25)
    assert slab.element_volumes().sum() == pytest.approx(1.0 * 0.25, rel=1e-12)
    report = validate_conformity(slab)
    assert report.clean


def test_extrude_rejects_empty_interval():
    with pytest.raises(NonPositiveTimeStep):
        extrude_fst(unit_square(), 1.0, 1.0)


def test_extrude_lateral_facets_tagged():
    spatial = unit_square(2, 2)
    slab = extrude_fst(spatial, 0.0, 1.0)
    # each 1D boundary facet extrudes into a quad split into 2 triangles
    assert len(slab.lateral_facets) == 2 * len(spatial.facet_nodes)
    assert set(slab.lateral_facet_tags) == {"left", "right", "bottom", "top"}


def test_extrude_interval_mesh():
    spatial = structured_interval(0.0, 2.0, 4)
    slab = extrude_fst(spatial, 0.0, 0.1)
    assert slab.nsd == 1
    assert slab.element_volumes().sum() == pytest.approx(0.2, rel=1e-13)
    assert len(slab.lateral_facets) == 2


# ---------------------------------------------------------------------------
# refinement smoothing


def test_smooth_refinement_levels():
    spatial = structured_interval(0.0, 1.0, 4)
    levels = smooth_refinement_levels(spatial, [3, 0, 0, 0, 0])
    # neighbours may differ by at most one level
    assert np.array_equal(levels, [3, 2, 1, 0, 0])
    with pytest.raises(RefinementConflict):
        smooth_refinement_levels(spatial, [-1, 0, 0, 0, 0])
    with pytest.raises(RefinementConflict):
        smooth_refinement_levels(spatial, [0, 0])


# ---------------------------------------------------------------------------
# SST subdivision


def test_sst_uniform_subdivision_counts():
    spatial = unit_square(2, 2)
    slab = subdivide_sst(spatial, 0.0, 0.3)
    # every prism splits into nsd + 1 = 3 simplices at refinement zero
    assert slab.n_elements == 3 * spatial.n_elements
    assert slab.element_type == "simplex"
    report = validate_conformity(slab)
    assert report.clean
    assert report.volume_defect < 1e-12


def test_sst_refined_column_counts():
    spatial = structured_interval(0.0, 1.0, 2)
    levels = np.array([1, 1, 1])
    slab = subdivide_sst(spatial, 0.0, 1.0, levels)
    # each column carries 2 sub-steps: one intermediate node per column
    assert slab.n_nodes == 2 * 3 + 3
    assert validate_conformity(slab).clean
    # intermediate nodes map back to their spatial columns
    assert np.array_equal(slab.node_column[6:], [0, 1, 2])


def test_sst_mixed_refinement_conforms():
    spatial = unit_square(3, 3)
    rng = np.random.default_rng(5)
    levels = rng.integers(0, 3, size=spatial.n_nodes)
    slab = subdivide_sst(spatial, 0.0, 0.125, levels)
    report = validate_conformity(slab)
    assert report.clean
    assert report.volume_defect < 1e-12


def test_sst_positive_orientation():
    spatial = unit_square(2, 3)
    slab = subdivide_sst(spatial, 0.0, 0.5)
    for elem in slab.elements:
        jac = (slab.nodes[elem[1:]] - slab.nodes[elem[0]]).T
        assert np.linalg.det(jac) > 0.0


def test_sst_interfaces():
    spatial = unit_square(2, 2)
    slab = subdivide_sst(spatial, 0.25, 0.75)
    assert np.all(slab.nodes[slab.lower_nodes, 2] == 0.25)
    assert np.all(slab.nodes[slab.upper_nodes, 2] == 0.75)
    assert len(slab.lower_facets) == spatial.n_elements
    assert len(slab.upper_facets) == spatial.n_elements


def test_sst_random_meshes_random_refinement():
    """Randomized subdivision study: conformity must never break."""
    rng = np.random.default_rng(42)
    for _ in range(10):
        spatial = random_spatial_mesh(rng)
        levels = rng.integers(0, 4, size=spatial.n_nodes)
        slab = subdivide_sst(spatial, 0.0, rng.uniform(0.01, 1.0), levels)
        report = validate_conformity(slab)
        assert report.clean, report.bad_facets[:3]
        assert report.volume_defect < 1e-12


# ---------------------------------------------------------------------------
# normals and conformity checks


def test_generalized_cross_2d_and_3d():
    n = generalized_cross(np.array([[1.0, 0.0]]))
    assert np.allclose(np.abs(n), [0.0, 1.0])
    n = generalized_cross(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))
    assert np.allclose(n, [0.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        generalized_cross(np.array([[1.0, 0.0, 0.0]]))


def test_facet_normals_point_outward():
    spatial = unit_square(2, 2)
    slab = extrude_fst(spatial, 0.0, 1.0)
    for facet, owner, tag in zip(slab.lateral_facets, slab.lateral_facet_owner,
                                 slab.lateral_facet_tags):
        n = facet_normal(facet, slab, owner)
        assert abs(np.linalg.norm(n) - 1.0) < 1e-13
        assert abs(n[2]) < 1e-13  # lateral facets have no time component
        expected = {"left": [-1, 0, 0], "right": [1, 0, 0],
                    "bottom": [0, -1, 0], "top": [0, 1, 0]}[tag]
        assert np.allclose(n, expected, atol=1e-12)


def test_facet_normal_rejects_degenerate():
    spatial = unit_square(1, 1)
    slab = extrude_fst(spatial, 0.0, 1.0)
    with pytest.raises(DegenerateFacet):
        facet_normal([0, 0, 0], slab, 0)


def test_validate_conformity_detects_defects():
    # two triangles sharing an edge, plus a duplicate of the first:
    # the interior edge is then shared by three elements
    nodes = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0],
                      [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]])
    elements = np.array([[0, 1, 2], [1, 3, 2], [0, 1, 2]])
    mesh_args = dict(
        element_type="simplex", t_lo=0.0, t_hi=1.0,
        lower_nodes=np.array([0, 1]), upper_nodes=np.array([2, 3]),
        lower_facets=np.zeros((0, 2), dtype=np.int64),
        lower_facet_owner=np.zeros(0, dtype=np.int64),
        lateral_facets=np.zeros((0, 2), dtype=np.int64),
        lateral_facet_owner=np.zeros(0, dtype=np.int64),
        lateral_facet_tags=[],
    )
    from stflow.mesh import SpaceTimeSlabMesh

    bad = SpaceTimeSlabMesh(nodes=nodes[:, :2] * 1.0, elements=elements, **mesh_args)
    report = validate_conformity(bad)
    assert not report.clean
    assert report.bad_facets


def test_dangling_node_detected():
    from stflow.mesh import SpaceTimeSlabMesh

    nodes = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 5.0]])
    elements = np.array([[0, 1, 2]])
    mesh = SpaceTimeSlabMesh(
        nodes=nodes, elements=elements, element_type="simplex",
        t_lo=0.0, t_hi=1.0,
        lower_nodes=np.array([0, 1]), upper_nodes=np.array([2]),
        lower_facets=np.zeros((0, 2), dtype=np.int64),
        lower_facet_owner=np.zeros(0, dtype=np.int64),
        lateral_facets=np.zeros((0, 2), dtype=np.int64),
        lateral_facet_owner=np.zeros(0, dtype=np.int64),
        lateral_facet_tags=[])
    report = validate_conformity(mesh)
    assert report.dangling_nodes == [3]


def test_spatial_mesh_helpers():
    spatial = unit_square(2, 2)
    assert spatial.dim == 2
    assert spatial.boundary_tags() == ["bottom", "left", "right", "top"]
    assert spatial.element_volumes().sum() == pytest.approx(1.0, rel=1e-13)
    owners = spatial.facet_owner_map()
    # every boundary facet is owned by exactly one element
    for f in spatial.facet_nodes:
        assert len(owners[tuple(sorted(f))]) == 1
