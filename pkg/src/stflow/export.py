"""Solution export: legacy ASCII VTK snapshots and line samples.

A space-time slab solution is sampled at a fixed time by locating each
query point in the slab (spatial location plus linear interpolation in
time for prisms, full simplex barycentric location otherwise).
"""

import numpy as np
from scipy.spatial import cKDTree

from .errors import ExportRangeError
from .mesh import SpaceTimeSlabMesh
from .simplex import p1_basis

__all__ = ["write_vtk_spatial", "sample_at_time", "sample_line", "write_csv"]

_FIELD_NAMES = {3: ["pressure", "velocity_x", "temperature"],
                4: ["pressure", "velocity_x", "velocity_y", "temperature"],
                5: ["pressure", "velocity_x", "velocity_y", "velocity_z", "temperature"]}


def write_vtk_spatial(path, spatial_nodes, elements, Y, comments=()):
    """Write nodal primitive fields on a simplicial spatial mesh (legacy VTK)."""
    nodes = np.asarray(spatial_nodes, dtype=float)
    elements = np.asarray(elements, dtype=np.int64)
    n, d = nodes.shape
    m = Y.shape[1]
    cell_type = {1: 3, 2: 5, 3: 10}[d]   # line / triangle / tetra
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write("stflow snapshot" + "".join(f" {c}" for c in comments) + "\n")
        fh.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {n} double\n")
        for x in nodes:
            full = np.zeros(3)
            full[:d] = x
            fh.write(f"{full[0]:.16e} {full[1]:.16e} {full[2]:.16e}\n")
        n_el, n_en = elements.shape
        fh.write(f"CELLS {n_el} {n_el * (n_en + 1)}\n")
        for e in elements:
            fh.write(str(n_en) + "".join(f" {v}" for v in e) + "\n")
        fh.write(f"CELL_TYPES {n_el}\n")
        for _ in range(n_el):
            fh.write(f"{cell_type}\n")
        fh.write(f"POINT_DATA {n}\n")
        for c, name in enumerate(_FIELD_NAMES[m]):
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            for v in Y[:, c]:
                fh.write(f"{v:.16e}\n")


def _locate_simplex(mesh, points):
    """Barycentric point location in a simplex slab via KD-tree candidates."""
    d = mesh.dim
    centroids = mesh.nodes[mesh.elements].mean(axis=1)
    tree = cKDTree(centroids)
    k = min(32, mesh.n_elements)
    _, cand = tree.query(points, k=k)
    cand = np.atleast_2d(cand)
    tol = 1e-10
    elems = np.empty(len(points), dtype=np.int64)
    lams = np.empty((len(points), mesh.elements.shape[1]))
    for i, x in enumerate(points):
        for e in cand[i]:
            Xe = mesh.nodes[mesh.elements[e]]
            J = (Xe[1:] - Xe[0]).T
            xi = np.linalg.solve(J, x - Xe[0])
            lam = p1_basis(xi)
            if lam.min() >= -tol:
                elems[i] = e
                lams[i] = lam
                break
        else:
            raise ExportRangeError(f"point {x.tolist()} not inside the space-time mesh")
    return elems, lams


def sample_at_time(mesh: SpaceTimeSlabMesh, Y, points, t):
    """Sample nodal fields at spatial points and time t inside one slab."""
    tol = 1e-12 * max(1.0, abs(mesh.t_hi))
    if t < mesh.t_lo - tol or t > mesh.t_hi + tol:
        raise ExportRangeError(
            f"time {t} outside slab [{mesh.t_lo}, {mesh.t_hi}]")
    t = min(max(t, mesh.t_lo), mesh.t_hi)
    points = np.asarray(points, dtype=float).reshape(-1, mesh.nsd)
    stpts = np.hstack([points, np.full((len(points), 1), t)])

    if mesh.element_type == "simplex":
        elems, lams = _locate_simplex(mesh, stpts)
        return np.einsum("pa,pac->pc", lams, Y[mesh.elements[elems]])

    # prism: locate spatially, then interpolate linearly in time
    ns = mesh.nsd + 1
    spatial = mesh.spatial
    cents = spatial.nodes[spatial.elements].mean(axis=1)
    tree = cKDTree(cents)
    k = min(32, spatial.n_elements)
    _, cand = tree.query(points, k=k)
    cand = np.atleast_2d(cand)
    th = (t - mesh.t_lo) / mesh.dt
    out = np.empty((len(points), Y.shape[1]))
    for i, x in enumerate(points):
        for e in cand[i]:
            Xe = spatial.nodes[spatial.elements[e]]
            if mesh.nsd == 1:
                xi = np.array([(x[0] - Xe[0, 0]) / (Xe[1, 0] - Xe[0, 0])])
            else:
                J = (Xe[1:] - Xe[0]).T
                xi = np.linalg.solve(J, x - Xe[0])
            lam = p1_basis(xi)
            if lam.min() >= -1e-10:
                conn = mesh.elements[e]
                vals = (1.0 - th) * Y[conn[:ns]] + th * Y[conn[ns:]]
                out[i] = lam @ vals
                break
        else:
            raise ExportRangeError(f"point {x.tolist()} outside the spatial mesh")
    return out


def sample_line(mesh, Y, start, end, n, t):
    """Sample fields along the segment start-end at time t; returns (xs, values)."""
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    s = np.linspace(0.0, 1.0, n)
    points = start[None, :] + s[:, None] * (end - start)[None, :]
    return points, sample_at_time(mesh, Y, points, t)


def write_csv(path, points, values, m):
    """Write sampled points and primitive fields as CSV with a header row."""
    points = np.asarray(points, dtype=float)
    names = _FIELD_NAMES[m]
    cols = [f"x{i + 1}" for i in range(points.shape[1])] + names
    data = np.hstack([points, values])
    np.savetxt(path, data, delimiter=",", header=",".join(cols), comments="")
