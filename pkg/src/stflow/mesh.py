"""Space-time slab meshes: FST extrusion, SST subdivision, validation.

A slab covers the time interval [t_lo, t_hi].  Spatial node i of the
extruded mesh becomes lower-interface node i and upper-interface node
n + i; SST intermediate-time nodes are appended afterwards.  The SST
subdivision sweeps each prism column-wise: every elementary "move"
raises one vertex column by one time step and emits the simplex spanned
by the current column tops plus the new node.  Moves are ordered by
(target time, global node index), which splits shared lateral faces
identically in neighbouring prisms and therefore guarantees conformity
without any communication.
"""

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import (
    DegenerateFacet,
    NegativeVolumeElement,
    NonConformingMesh,
    NonPositiveTimeStep,
    RefinementConflict,
)
from .simplex import simplex_volume

__all__ = [
    "SpatialMesh",
    "SpaceTimeSlabMesh",
    "extrude_fst",
    "subdivide_sst",
    "validate_conformity",
    "facet_normal",
    "ConformityReport",
]


@dataclass
class SpatialMesh:
    """Conforming simplicial spatial mesh with tagged boundary facets."""

    nodes: np.ndarray           # (n_nodes, d_s)
    elements: np.ndarray        # (n_el, d_s + 1) int
    facet_nodes: np.ndarray     # (n_bf, d_s) int
    facet_tags: list            # str per boundary facet

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=float)
        self.elements = np.ascontiguousarray(self.elements, dtype=np.int64)
        self.facet_nodes = np.ascontiguousarray(self.facet_nodes, dtype=np.int64)
        if self.facet_nodes.ndim == 1:
            self.facet_nodes = self.facet_nodes.reshape(-1, 1)

    @property
    def dim(self):
        return self.nodes.shape[1]

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_elements(self):
        return self.elements.shape[0]

    def element_volumes(self):
        return np.array([simplex_volume(self.nodes[e]) for e in self.elements])

    def boundary_tags(self):
        return sorted(set(self.facet_tags))

    def facet_owner_map(self):
        """Map sorted facet node tuple -> owning element index."""
        owners = {}
        d = self.dim
        for e, elem in enumerate(self.elements):
            for drop in range(d + 1):
                face = tuple(sorted(np.delete(elem, drop)))
                owners.setdefault(face, []).append(e)
        return owners


@dataclass
class SpaceTimeSlabMesh:
    """One space-time slab: elements, interface node maps, tagged facets.

    element_type is "simplex" (SST/UST) or "prism" (FST).  Facet arrays
    hold simplex facets of the slab boundary: prism lateral quads are
    stored split into two triangles each.
    """

    nodes: np.ndarray            # (N, d_s + 1); last coordinate is time
    elements: np.ndarray         # (n_el, n_en) int
    element_type: str
    t_lo: float
    t_hi: float
    lower_nodes: np.ndarray      # node ids on the lower interface
    upper_nodes: np.ndarray
    lower_facets: np.ndarray     # (n_lf, d_s + 1) int
    lower_facet_owner: np.ndarray
    lateral_facets: np.ndarray   # (n_fac, d_s + 1) int
    lateral_facet_owner: np.ndarray
    lateral_facet_tags: list
    spatial: SpatialMesh = None          # present for FST/SST
    node_level: np.ndarray = None        # per-spatial-node refinement level (SST)
    node_column: np.ndarray = None       # spatial node id per slab node (FST/SST)
    upper_facets: np.ndarray = None
    upper_facet_owner: np.ndarray = None

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=float)
        self.elements = np.ascontiguousarray(self.elements, dtype=np.int64)

    @property
    def dim(self):
        return self.nodes.shape[1]

    @property
    def nsd(self):
        return self.dim - 1

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_elements(self):
        return self.elements.shape[0]

    @property
    def dt(self):
        return self.t_hi - self.t_lo

    def element_volumes(self):
        if self.element_type == "prism":
            ns = self.nsd + 1
            vols = np.empty(self.n_elements)
            for e, elem in enumerate(self.elements):
                spatial = self.nodes[elem[:ns], : self.nsd]
                vols[e] = simplex_volume(spatial) * self.dt
            return vols
        return np.array([simplex_volume(self.nodes[e]) for e in self.elements])


def _staircase_tet_split(lo, hi):
    """Split a prism (columns lo[i]-hi[i], index-sorted sweep) into simplices."""
    order = np.argsort(lo, kind="stable")
    tops = list(lo)
    elems = []
    for pos in order:
        elems.append(list(tops) + [hi[pos]])
        tops[pos] = hi[pos]
    return elems


def extrude_fst(spatial: SpatialMesh, t_lo, t_hi) -> SpaceTimeSlabMesh:
    """Extrude a spatial mesh into one slab of prismatic space-time elements."""
    if not t_hi > t_lo:
        raise NonPositiveTimeStep(f"t_lo = {t_lo}, t_hi = {t_hi}")
    n = spatial.n_nodes
    ds = spatial.dim
    nodes = np.empty((2 * n, ds + 1))
    nodes[:n, :ds] = spatial.nodes
    nodes[:n, ds] = t_lo
    nodes[n:, :ds] = spatial.nodes
    nodes[n:, ds] = t_hi
    elements = np.hstack([spatial.elements, spatial.elements + n])

    lower_facets = spatial.elements.copy()
    lower_owner = np.arange(spatial.n_elements)
    upper_facets = spatial.elements + n
    upper_owner = np.arange(spatial.n_elements)

    owners = spatial.facet_owner_map()
    lat_facets, lat_owner, lat_tags = [], [], []
    for f, tag in zip(spatial.facet_nodes, spatial.facet_tags):
        owner_list = owners.get(tuple(sorted(f)), [])
        if len(owner_list) != 1:
            raise NonConformingMesh(f"boundary facet {tuple(f)} owned by {len(owner_list)} elements")
        owner = owner_list[0]
        if ds == 1:
            # Lateral face of a 1D extrusion is the vertical segment itself.
            lat_facets.append([f[0], f[0] + n])
            lat_owner.append(owner)
            lat_tags.append(tag)
        else:
            for tri in _staircase_tet_split(list(f), [v + n for v in f]):
                lat_facets.append(tri)
                lat_owner.append(owner)
                lat_tags.append(tag)

    return SpaceTimeSlabMesh(
        nodes=nodes,
        elements=elements,
        element_type="prism",
        t_lo=float(t_lo),
        t_hi=float(t_hi),
        lower_nodes=np.arange(n),
        upper_nodes=np.arange(n, 2 * n),
        lower_facets=lower_facets,
        lower_facet_owner=lower_owner,
        lateral_facets=np.array(lat_facets, dtype=np.int64),
        lateral_facet_owner=np.array(lat_owner, dtype=np.int64),
        lateral_facet_tags=lat_tags,
        spatial=spatial,
        node_column=np.concatenate([np.arange(n), np.arange(n)]),
        upper_facets=upper_facets,
        upper_facet_owner=upper_owner,
    )


def smooth_refinement_levels(spatial: SpatialMesh, levels):
    """Raise levels until they differ by at most one across any element edge."""
    levels = np.asarray(levels, dtype=np.int64).copy()
    if levels.shape != (spatial.n_nodes,):
        raise RefinementConflict("refinement level field must be one level per spatial node")
    if np.any(levels < 0):
        raise RefinementConflict("negative refinement level")
    edges = set()
    for elem in spatial.elements:
        for a in range(len(elem)):
            for b in range(a + 1, len(elem)):
                edges.add((elem[a], elem[b]))
    changed = True
    while changed:
        changed = False
        for a, b in edges:
            if levels[a] < levels[b] - 1:
                levels[a] = levels[b] - 1
                changed = True
            elif levels[b] < levels[a] - 1:
                levels[b] = levels[a] - 1
                changed = True
    return levels


def subdivide_sst(spatial: SpatialMesh, t_lo, t_hi, refine_level=None) -> SpaceTimeSlabMesh:
    """Subdivide the extruded slab into conforming simplices.

    refine_level gives a nonnegative temporal refinement level per
    spatial node; node columns carry 2^level uniform sub-steps.  Levels
    are smoothed to at most one level difference per edge first.
    """
    if not t_hi > t_lo:
        raise NonPositiveTimeStep(f"t_lo = {t_lo}, t_hi = {t_hi}")
    n = spatial.n_nodes
    ds = spatial.dim
    if refine_level is None:
        levels = np.zeros(n, dtype=np.int64)
    else:
        levels = smooth_refinement_levels(spatial, refine_level)
    dt = float(t_hi - t_lo)

    steps = 2**levels
    # Column node ids: k = 0 is the spatial node, k = steps is the upper
    # copy, intermediate nodes are appended after the two interfaces.
    columns = []
    extra_coords = []
    extra_cols = []
    next_id = 2 * n
    for v in range(n):
        col = [v]
        for k in range(1, steps[v]):
            col.append(next_id)
            extra_coords.append(np.concatenate([spatial.nodes[v], [t_lo + dt * k / steps[v]]]))
            extra_cols.append(v)
            next_id += 1
        col.append(v + n)
        columns.append(col)

    nodes = np.empty((next_id, ds + 1))
    nodes[:n, :ds] = spatial.nodes
    nodes[:n, ds] = t_lo
    nodes[n : 2 * n, :ds] = spatial.nodes
    nodes[n : 2 * n, ds] = t_hi
    if extra_coords:
        nodes[2 * n :] = np.array(extra_coords)

    def move_key(v, k):
        # Target time of the move, tie-broken by global node index.
        return (t_lo + dt * k / steps[v], v)

    elements = []
    move_elem = {}
    lower_facets, lower_owner = [], []
    upper_facets, upper_owner = [], []
    for e, elem in enumerate(spatial.elements):
        moves = sorted(
            ((v, k) for v in elem for k in range(1, steps[v] + 1)),
            key=lambda mk: move_key(*mk),
        )
        height = {v: 0 for v in elem}
        lower_facets.append(list(elem))
        lower_owner.append(len(elements))
        for v, k in moves:
            tops = [columns[w][height[w]] for w in elem]
            new_node = columns[v][k]
            move_elem[(e, v, k)] = len(elements)
            elements.append(tops + [new_node])
            height[v] = k
        upper_facets.append([columns[w][height[w]] for w in elem])
        upper_owner.append(len(elements) - 1)
    elements = np.array(elements, dtype=np.int64)

    owners = spatial.facet_owner_map()
    lat_facets, lat_owner, lat_tags = [], [], []
    for f, tag in zip(spatial.facet_nodes, spatial.facet_tags):
        owner_list = owners.get(tuple(sorted(f)), [])
        if len(owner_list) != 1:
            raise NonConformingMesh(f"boundary facet {tuple(f)} owned by {len(owner_list)} elements")
        owner = owner_list[0]
        moves = sorted(
            ((v, k) for v in f for k in range(1, steps[v] + 1)),
            key=lambda mk: move_key(*mk),
        )
        height = {v: 0 for v in f}
        for v, k in moves:
            tops = [columns[w][height[w]] for w in f]
            lat_facets.append(tops + [columns[v][k]])
            lat_owner.append(move_elem[(owner, v, k)])
            lat_tags.append(tag)
            height[v] = k

    mesh = SpaceTimeSlabMesh(
        nodes=nodes,
        elements=elements,
        element_type="simplex",
        t_lo=float(t_lo),
        t_hi=float(t_hi),
        lower_nodes=np.arange(n),
        upper_nodes=np.arange(n, 2 * n),
        lower_facets=np.array(lower_facets, dtype=np.int64),
        lower_facet_owner=np.array(lower_owner, dtype=np.int64),
        lateral_facets=np.array(lat_facets, dtype=np.int64),
        lateral_facet_owner=np.array(lat_owner, dtype=np.int64),
        lateral_facet_tags=lat_tags,
        spatial=spatial,
        node_level=levels,
        node_column=np.concatenate(
            [np.arange(n), np.arange(n), np.array(extra_cols, dtype=np.int64)]),
        upper_facets=np.array(upper_facets, dtype=np.int64),
        upper_facet_owner=np.array(upper_owner, dtype=np.int64),
    )
    _orient_positive(mesh)
    return mesh


def _orient_positive(mesh: SpaceTimeSlabMesh):
    """Reorder simplex element nodes in place to positive Jacobian determinant."""
    if mesh.element_type != "simplex":
        return
    for elem in mesh.elements:
        jac = (mesh.nodes[elem[1:]] - mesh.nodes[elem[0]]).T
        det = np.linalg.det(jac)
        if det == 0.0:
            raise NegativeVolumeElement(f"degenerate element {elem.tolist()}")
        if det < 0.0:
            elem[-2], elem[-1] = elem[-1], elem[-2]


def generalized_cross(edges):
    """Vector orthogonal to the d-1 row vectors of `edges` in R^d."""
    edges = np.asarray(edges, dtype=float)
    d = edges.shape[1]
    if edges.shape[0] != d - 1:
        raise ValueError("need d-1 edge vectors in R^d")
    normal = np.empty(d)
    for i in range(d):
        minor = np.delete(edges, i, axis=1)
        normal[i] = (-1.0) ** i * np.linalg.det(minor)
    return normal


def facet_normal(facet_nodes, mesh: SpaceTimeSlabMesh, owner):
    """Outward unit normal of a boundary facet (a d-1 simplex in R^d).

    Orientation is fixed against the owner element centroid.
    """
    coords = mesh.nodes[np.asarray(facet_nodes, dtype=np.int64)]
    edges = coords[1:] - coords[0]
    normal = generalized_cross(edges)
    norm = np.linalg.norm(normal)
    scale = max(np.linalg.norm(edges, axis=1).max(), 1e-300)
    if norm <= 1e-12 * scale ** (mesh.dim - 1):
        raise DegenerateFacet(f"facet {np.asarray(facet_nodes).tolist()} is degenerate")
    normal /= norm
    centroid_owner = mesh.nodes[mesh.elements[owner]].mean(axis=0)
    centroid_facet = coords.mean(axis=0)
    if normal @ (centroid_facet - centroid_owner) < 0.0:
        normal = -normal
    return normal


@dataclass
class ConformityReport:
    """Defect listing produced by validate_conformity."""

    bad_facets: list = field(default_factory=list)   # (facet nodes, owner count)
    dangling_nodes: list = field(default_factory=list)
    volume_sum: float = 0.0
    volume_expected: float = None
    volume_defect: float = None
    nonpositive_elements: list = field(default_factory=list)

    @property
    def clean(self):
        vol_ok = self.volume_defect is None or self.volume_defect < 1e-12
        return (not self.bad_facets and not self.dangling_nodes
                and not self.nonpositive_elements and vol_ok)


def validate_conformity(mesh: SpaceTimeSlabMesh) -> ConformityReport:
    """Report facet-sharing defects, dangling nodes, and the volume balance."""
    report = ConformityReport()
    if mesh.n_elements == 0:
        return report

    counts = {}
    if mesh.element_type == "simplex":
        n_en = mesh.elements.shape[1]
        for elem in mesh.elements:
            for drop in range(n_en):
                face = tuple(sorted(np.delete(elem, drop)))
                counts[face] = counts.get(face, 0) + 1
    else:
        ns = mesh.nsd + 1
        for elem in mesh.elements:
            lower, upper = elem[:ns], elem[ns:]
            counts[tuple(sorted(lower))] = counts.get(tuple(sorted(lower)), 0) + 1
            counts[tuple(sorted(upper))] = counts.get(tuple(sorted(upper)), 0) + 1
            for drop in range(ns):
                quad = tuple(sorted(np.concatenate([np.delete(lower, drop), np.delete(upper, drop)])))
                counts[quad] = counts.get(quad, 0) + 1
    for face, cnt in counts.items():
        if cnt not in (1, 2):
            report.bad_facets.append((face, cnt))

    used = np.zeros(mesh.n_nodes, dtype=bool)
    used[mesh.elements.ravel()] = True
    report.dangling_nodes = list(np.nonzero(~used)[0])

    vols = mesh.element_volumes()
    report.volume_sum = float(vols.sum())
    bad = np.nonzero(vols <= 0.0)[0]
    report.nonpositive_elements = list(bad)
    if mesh.spatial is not None:
        expected = float(mesh.spatial.element_volumes().sum() * mesh.dt)
        report.volume_expected = expected
        report.volume_defect = abs(report.volume_sum - expected) / expected
    return report
