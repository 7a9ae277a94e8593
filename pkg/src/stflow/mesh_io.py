"""Mesh file I/O.

Two formats are handled:

* the native ``stmesh`` ASCII format, used for both spatial meshes and
  unstructured space-time (UST) slab meshes::

      stmesh <dim> <n_nodes> <n_elements> <n_facets>
      <id> <x> [<y> [<z> [<t>]]]          # one line per node, 0-based ids
      <id> <n1> ... <n_{dim+1}>           # one line per simplex element
      <tag> <n1> ... <n_dim>              # one line per boundary facet

  For space-time meshes the last coordinate is time and the reserved
  facet tags "lower"/"upper" mark the slab interfaces.

* the Gmsh ``$MeshFormat 2.2`` ASCII interchange format, accepted for
  spatial meshes only.
"""

import numpy as np

from .errors import NegativeVolumeElement, NonConformingMesh, ParseError
from .mesh import SpaceTimeSlabMesh, SpatialMesh, _orient_positive

__all__ = ["read_spatial_mesh", "read_stmesh_spatial", "read_gmsh22",
           "write_stmesh_spatial", "write_stmesh_slab", "import_ust"]


def _tokenized_lines(path):
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line.split()


def _parse_stmesh(path):
    lines = _tokenized_lines(path)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise ParseError("empty file", line=1, path=path) from None
    if header[0] != "stmesh" or len(header) != 5:
        raise ParseError("expected header 'stmesh <dim> <n_nodes> <n_elements> <n_facets>'",
                         line=lineno, path=path)
    try:
        dim, n_nodes, n_el, n_fac = (int(v) for v in header[1:])
    except ValueError:
        raise ParseError("non-integer header field", line=lineno, path=path) from None
    if dim < 1 or dim > 4:
        raise ParseError(f"unsupported dimension {dim}", line=lineno, path=path)

    nodes = np.empty((n_nodes, dim))
    seen = np.zeros(n_nodes, dtype=bool)
    for _ in range(n_nodes):
        try:
            lineno, tok = next(lines)
        except StopIteration:
            raise ParseError("unexpected end of file in node block", line=lineno, path=path) from None
        if len(tok) != dim + 1:
            raise ParseError(f"node line needs id plus {dim} coordinates", line=lineno, path=path)
        try:
            idx = int(tok[0])
            coords = [float(v) for v in tok[1:]]
        except ValueError:
            raise ParseError("malformed node line", line=lineno, path=path) from None
        if not 0 <= idx < n_nodes:
            raise ParseError(f"node id {idx} out of range", line=lineno, path=path)
        nodes[idx] = coords
        seen[idx] = True
    if not seen.all():
        raise ParseError("missing node ids in node block", path=path)

    elements = np.empty((n_el, dim + 1), dtype=np.int64)
    for i in range(n_el):
        try:
            lineno, tok = next(lines)
        except StopIteration:
            raise ParseError("unexpected end of file in element block", line=lineno, path=path) from None
        if len(tok) != dim + 2:
            raise ParseError(f"element line needs id plus {dim + 1} node ids", line=lineno, path=path)
        try:
            idx = int(tok[0])
            conn = [int(v) for v in tok[1:]]
        except ValueError:
            raise ParseError("malformed element line", line=lineno, path=path) from None
        if not 0 <= idx < n_el:
            raise ParseError(f"element id {idx} out of range", line=lineno, path=path)
        if any(not 0 <= c < n_nodes for c in conn):
            raise ParseError("element references unknown node", line=lineno, path=path)
        elements[idx] = conn

    facet_nodes = np.empty((n_fac, dim), dtype=np.int64)
    facet_tags = []
    for i in range(n_fac):
        try:
            lineno, tok = next(lines)
        except StopIteration:
            raise ParseError("unexpected end of file in facet block", line=lineno, path=path) from None
        if len(tok) != dim + 1:
            raise ParseError(f"facet line needs tag plus {dim} node ids", line=lineno, path=path)
        try:
            conn = [int(v) for v in tok[1:]]
        except ValueError:
            raise ParseError("malformed facet line", line=lineno, path=path) from None
        if any(not 0 <= c < n_nodes for c in conn):
            raise ParseError("facet references unknown node", line=lineno, path=path)
        facet_tags.append(tok[0])
        facet_nodes[i] = conn

    return nodes, elements, facet_nodes, facet_tags


def read_stmesh_spatial(path) -> SpatialMesh:
    nodes, elements, facet_nodes, facet_tags = _parse_stmesh(path)
    return SpatialMesh(nodes=nodes, elements=elements,
                       facet_nodes=facet_nodes, facet_tags=facet_tags)


def read_gmsh22(path) -> SpatialMesh:
    """Read a spatial mesh from a Gmsh 2.2 ASCII file.

    Physical/elementary tags become string boundary tags; element types
    1 (line), 2 (triangle), 4 (tet) are recognized and the highest
    present dimension defines the spatial elements.
    """
    _GMSH_TYPES = {1: 2, 2: 3, 4: 4}  # type -> node count
    sections = {}
    current = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("$End"):
                current = None
            elif line.startswith("$"):
                current = line[1:]
                sections[current] = []
            elif current is not None:
                sections[current].append((lineno, line))
    if "MeshFormat" not in sections or not sections["MeshFormat"][0][1].startswith("2.2"):
        raise ParseError("only MeshFormat 2.2 ASCII is supported", path=path)
    if "Nodes" not in sections or "Elements" not in sections:
        raise ParseError("missing $Nodes or $Elements section", path=path)

    node_lines = sections["Nodes"]
    n_nodes = int(node_lines[0][1])
    coords = np.empty((n_nodes, 3))
    id_map = {}
    for i, (lineno, line) in enumerate(node_lines[1 : 1 + n_nodes]):
        tok = line.split()
        if len(tok) != 4:
            raise ParseError("malformed node line", line=lineno, path=path)
        id_map[int(tok[0])] = i
        coords[i] = [float(v) for v in tok[1:]]

    cells = {2: [], 3: [], 4: []}
    tags = {2: [], 3: [], 4: []}
    elem_lines = sections["Elements"]
    n_el = int(elem_lines[0][1])
    for lineno, line in elem_lines[1 : 1 + n_el]:
        tok = line.split()
        etype = int(tok[1])
        if etype not in _GMSH_TYPES:
            continue
        n_tags = int(tok[2])
        tag = tok[3] if n_tags > 0 else "0"
        conn = [id_map[int(v)] for v in tok[3 + n_tags :]]
        nn = _GMSH_TYPES[etype]
        if len(conn) != nn:
            raise ParseError("element node count mismatch", line=lineno, path=path)
        cells[nn].append(conn)
        tags[nn].append(tag)

    if cells[4]:
        ds, elem_nn = 3, 4
    elif cells[3]:
        ds, elem_nn = 2, 3
    elif cells[2]:
        ds, elem_nn = 1, 2
    else:
        raise ParseError("no supported elements found", path=path)
    elements = np.array(cells[elem_nn], dtype=np.int64)
    facet_conn = np.array(cells[elem_nn - 1], dtype=np.int64) if cells[elem_nn - 1] else \
        np.empty((0, ds), dtype=np.int64)
    facet_tags = tags[elem_nn - 1]
    return SpatialMesh(nodes=coords[:, :ds], elements=elements,
                       facet_nodes=facet_conn, facet_tags=facet_tags)


def read_spatial_mesh(path) -> SpatialMesh:
    """Dispatch on content: Gmsh 2.2 if the file starts with $MeshFormat."""
    with open(path) as fh:
        first = fh.readline().strip()
    if first.startswith("$MeshFormat"):
        return read_gmsh22(path)
    return read_stmesh_spatial(path)


def _write_stmesh(path, dim, nodes, elements, facet_rows):
    with open(path, "w") as fh:
        fh.write(f"stmesh {dim} {len(nodes)} {len(elements)} {len(facet_rows)}\n")
        for i, x in enumerate(nodes):
            fh.write(f"{i} " + " ".join(f"{v:.17g}" for v in x) + "\n")
        for i, conn in enumerate(elements):
            fh.write(f"{i} " + " ".join(str(v) for v in conn) + "\n")
        for tag, conn in facet_rows:
            fh.write(f"{tag} " + " ".join(str(v) for v in conn) + "\n")


def write_stmesh_spatial(path, mesh: SpatialMesh):
    rows = list(zip(mesh.facet_tags, mesh.facet_nodes))
    _write_stmesh(path, mesh.dim, mesh.nodes, mesh.elements, rows)


def write_stmesh_slab(path, mesh: SpaceTimeSlabMesh):
    """Write a simplex slab mesh with lower/upper interface facets tagged."""
    if mesh.element_type != "simplex":
        raise ValueError("only simplex slab meshes can be written")
    rows = [("lower", f) for f in mesh.lower_facets]
    if mesh.upper_facets is not None:
        rows += [("upper", f) for f in mesh.upper_facets]
    rows += list(zip(mesh.lateral_facet_tags, mesh.lateral_facets))
    _write_stmesh(path, mesh.dim, mesh.nodes, mesh.elements, rows)


def import_ust(path, lower_tag="lower", upper_tag="upper") -> SpaceTimeSlabMesh:
    """Load an unstructured space-time slab mesh from an stmesh file.

    The last coordinate is time.  Elements are reordered to positive
    Jacobian determinant; duplicated connectivity and facet-sharing
    defects raise NonConformingMesh, zero-volume elements raise
    NegativeVolumeElement.
    """
    nodes, elements, facet_nodes, facet_tags = _parse_stmesh(path)
    dim = nodes.shape[1]

    keys = [tuple(sorted(e)) for e in elements]
    if len(set(keys)) != len(keys):
        raise NonConformingMesh(f"{path}: duplicate element connectivity")

    t = nodes[:, -1]
    t_lo, t_hi = float(t.min()), float(t.max())

    mesh = SpaceTimeSlabMesh(
        nodes=nodes,
        elements=elements,
        element_type="simplex",
        t_lo=t_lo,
        t_hi=t_hi,
        lower_nodes=np.empty(0, dtype=np.int64),
        upper_nodes=np.empty(0, dtype=np.int64),
        lower_facets=np.empty((0, dim), dtype=np.int64),
        lower_facet_owner=np.empty(0, dtype=np.int64),
        lateral_facets=np.empty((0, dim), dtype=np.int64),
        lateral_facet_owner=np.empty(0, dtype=np.int64),
        lateral_facet_tags=[],
    )
    try:
        _orient_positive(mesh)
    except NegativeVolumeElement:
        raise
    vols = mesh.element_volumes()
    if np.any(vols <= 0.0):
        raise NegativeVolumeElement(f"{path}: element with non-positive volume")

    counts = {}
    for elem in mesh.elements:
        for drop in range(dim + 1):
            face = tuple(sorted(np.delete(elem, drop)))
            counts.setdefault(face, []).append(True)
    bad = [f for f, owners in counts.items() if len(owners) not in (1, 2)]
    if bad:
        raise NonConformingMesh(f"{path}: facet shared by more than two elements, e.g. {bad[0]}")

    owners = {}
    for e, elem in enumerate(mesh.elements):
        for drop in range(dim + 1):
            face = tuple(sorted(np.delete(elem, drop)))
            owners.setdefault(face, []).append(e)

    lower_facets, lower_owner = [], []
    upper_facets, upper_owner = [], []
    lat_facets, lat_owner, lat_tags = [], [], []
    for f, tag in zip(facet_nodes, facet_tags):
        owner_list = owners.get(tuple(sorted(f)), [])
        if len(owner_list) != 1:
            raise NonConformingMesh(
                f"{path}: tagged facet {tuple(f)} has {len(owner_list)} owners")
        owner = owner_list[0]
        if tag == lower_tag:
            lower_facets.append(f)
            lower_owner.append(owner)
        elif tag == upper_tag:
            upper_facets.append(f)
            upper_owner.append(owner)
        else:
            lat_facets.append(f)
            lat_owner.append(owner)
            lat_tags.append(tag)

    mesh.lower_facets = np.array(lower_facets, dtype=np.int64).reshape(-1, dim)
    mesh.lower_facet_owner = np.array(lower_owner, dtype=np.int64)
    mesh.upper_facets = np.array(upper_facets, dtype=np.int64).reshape(-1, dim)
    mesh.upper_facet_owner = np.array(upper_owner, dtype=np.int64)
    mesh.lateral_facets = np.array(lat_facets, dtype=np.int64).reshape(-1, dim)
    mesh.lateral_facet_owner = np.array(lat_owner, dtype=np.int64)
    mesh.lateral_facet_tags = lat_tags
    mesh.lower_nodes = np.unique(mesh.lower_facets)
    mesh.upper_nodes = np.unique(mesh.upper_facets)
    return mesh
