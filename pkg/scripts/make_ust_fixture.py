"""Generate the packaged unstructured space-time mesh for the pulse case.

Builds a genuinely unstructured (1+1)-dimensional triangulation of the
space-time domain [0, 4 lam] x [0, lam/c0]: grid points are jittered in
both space and time (boundary nodes stay on their boundary lines) and
triangulated with Delaunay in coordinates scaled so that space and time
steps are comparable.  Boundary edges are tagged lower/upper/left/right.

Usage: python3 scripts/make_ust_fixture.py [nx] [nt] [out]
"""

import sys
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from stflow.cases import PulseParams  # noqa: E402


def build(nx=400, nt=100, seed=20240817):
    params = PulseParams()
    L = 4.0 * params.lam
    t_f = params.lam / params.c0
    xs = np.linspace(0.0, L, nx + 1)
    ts = np.linspace(0.0, t_f, nt + 1)
    X, T = np.meshgrid(xs, ts, indexing="ij")
    pts = np.column_stack([X.ravel(), T.ravel()])

    rng = np.random.default_rng(seed)
    dx = L / nx
    dt = t_f / nt
    interior_x = (pts[:, 0] > 0.0) & (pts[:, 0] < L)
    interior_t = (pts[:, 1] > 0.0) & (pts[:, 1] < t_f)
    jit = rng.uniform(-0.25, 0.25, size=pts.shape)
    pts[:, 0] += np.where(interior_x, jit[:, 0] * dx, 0.0)
    pts[:, 1] += np.where(interior_t, jit[:, 1] * dt, 0.0)

    # triangulate with space and time on comparable scales
    scaled = np.column_stack([pts[:, 0] / dx, pts[:, 1] / dt])
    tri = Delaunay(scaled)
    elements = tri.simplices.astype(np.int64)

    # keep only triangles with nonzero area (paranoia against slivers)
    a = pts[elements[:, 1]] - pts[elements[:, 0]]
    b = pts[elements[:, 2]] - pts[elements[:, 0]]
    area = 0.5 * np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
    if area.min() <= 1e-14 * dx * dt:
        raise RuntimeError("degenerate triangle in Delaunay output")

    # boundary edges: count edge occurrences
    edges = {}
    for elem in elements:
        for i in range(3):
            e = tuple(sorted((elem[i], elem[(i + 1) % 3])))
            edges[e] = edges.get(e, 0) + 1
    tol = 1e-9
    rows = []
    for (a_, b_), cnt in edges.items():
        if cnt != 1:
            continue
        pa, pb = pts[a_], pts[b_]
        if abs(pa[1]) < tol * t_f and abs(pb[1]) < tol * t_f:
            tag = "lower"
        elif abs(pa[1] - t_f) < tol * t_f and abs(pb[1] - t_f) < tol * t_f:
            tag = "upper"
        elif abs(pa[0]) < tol and abs(pb[0]) < tol:
            tag = "left"
        elif abs(pa[0] - L) < tol and abs(pb[0] - L) < tol:
            tag = "right"
        else:
            raise RuntimeError(f"boundary edge {(a_, b_)} not on any boundary line")
        rows.append((tag, (a_, b_)))
    return pts, elements, rows


def main():
    nx = int(sys.argv[1]) if len(sys.argv) > 1 else 400
    nt = int(sys.argv[2]) if len(sys.argv) > 2 else 100
    out = Path(sys.argv[3]) if len(sys.argv) > 3 else \
        Path(__file__).resolve().parent.parent / "src" / "stflow" / "fixtures" / "pulse_ust.stmesh"
    pts, elements, rows = build(nx, nt)
    from stflow.mesh_io import _write_stmesh
    _write_stmesh(out, 2, pts, elements, rows)
    print(f"wrote {out}: {len(pts)} nodes, {len(elements)} elements, {len(rows)} facets")


if __name__ == "__main__":
    main()
