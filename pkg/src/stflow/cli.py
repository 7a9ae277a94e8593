"""Command-line driver.

    stflow run --case pressure-pulse --method fst [--cfl R] [--config FILE]
               [--out DIR] [--threads N]

Cases: pressure-pulse (acoustic pulse benchmark), flat-plate (supersonic
boundary layer; long-running), custom (rest-state smoke run on a
user-supplied spatial mesh, --mesh required).  Writes a VTK snapshot of
the final time level, a centerline CSV sample, and a key=value run
summary.
"""

import argparse
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from .assembly import SolverConfig, march_slabs, BoundarySpec
from .cases import (
    CaseSpec,
    build_flat_plate_case,
    build_pulse_case,
)
from .config import load_config
from .errors import StflowError
from .export import sample_line, write_csv, write_vtk_spatial
from .gas import air
from .mesh_io import import_ust, read_spatial_mesh

__all__ = ["main", "build_parser"]


def build_parser():
    parser = argparse.ArgumentParser(prog="stflow",
                                     description="simplex space-time compressible flow solver")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a case")
    run.add_argument("--case", required=True,
                     choices=["pressure-pulse", "flat-plate", "custom"])
    run.add_argument("--method", required=True, choices=["fst", "sst", "ust"])
    run.add_argument("--cfl", type=float, default=2.0)
    run.add_argument("--config", type=Path, default=None)
    run.add_argument("--out", type=Path, default=Path("out"))
    run.add_argument("--threads", type=int, default=1)
    run.add_argument("--mesh", type=Path, default=None,
                     help="spatial mesh for --case custom (stmesh or Gmsh 2.2)")
    run.add_argument("--resolution", default="coarse",
                     choices=["coarse", "medium", "fine"],
                     help="flat-plate mesh resolution")
    run.add_argument("--keep-slabs", action="store_true",
                     help="retain every slab solution in memory")
    return parser


def pulse_ust_mesh():
    """The packaged (1+1)-dimensional space-time mesh of the pulse domain."""
    ref = resources.files("stflow") / "fixtures" / "pulse_ust.stmesh"
    with resources.as_file(ref) as path:
        return import_ust(path)


def _build_case(args):
    if args.case == "pressure-pulse":
        if args.method == "ust":
            return build_pulse_case("ust", ust_mesh=pulse_ust_mesh())
        return build_pulse_case(args.method, cfl=args.cfl)
    if args.case == "flat-plate":
        if args.method == "ust":
            raise StflowError("flat-plate has no packaged space-time mesh; use fst or sst")
        return build_flat_plate_case(args.resolution, method=args.method)
    # custom: rest-state march on a user mesh, full Dirichlet everywhere
    if args.mesh is None:
        raise StflowError("--case custom requires --mesh")
    spatial = read_spatial_mesh(args.mesh)
    gas = air()
    rest = [1.0e5] + [0.0] * spatial.dim + [288.15]
    bspec = BoundarySpec(dirichlet={tag: rest for tag in spatial.boundary_tags()})
    return CaseSpec(
        name="custom", method=args.method, gas=gas, spatial_mesh=spatial,
        initial_condition=lambda x: np.array(rest), boundary_spec=bspec,
        t_start=0.0, t_end=1.0e-3, n_slabs=10,
        refine_level=(np.zeros(spatial.n_nodes, dtype=np.int64)
                      if args.method == "sst" else None),
        typ=np.array([1.0e5] + [np.sqrt(gas.gamma * gas.R * 288.15)] * spatial.dim
                     + [288.15]))


def _final_state(case, records):
    """(spatial nodes, spatial elements, nodal Y at final time)."""
    last = records[-1]
    if case.method == "ust":
        mesh, Y = last.mesh, last.solution.Y
        nodes = mesh.nodes[mesh.upper_nodes, : mesh.nsd]
        order = np.argsort(nodes[:, 0])
        pts = nodes[order]
        elems = np.array([[i, i + 1] for i in range(len(pts) - 1)], dtype=np.int64)
        return pts, elems, Y[mesh.upper_nodes][order]
    spatial = case.spatial_mesh
    Y = last.upper_trace if last.upper_trace is not None \
        else last.solution.Y[last.mesh.upper_nodes]
    return spatial.nodes, spatial.elements, Y


def run_case(args, log=print):
    cfg = SolverConfig()
    if args.config is not None:
        load_config(args.config, cfg)
    cfg.threads = args.threads
    if args.threads > 1:
        try:
            import numba
            numba.set_num_threads(args.threads)
        except ImportError:
            pass

    case = _build_case(args)
    args.out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    records = march_slabs(case, cfg, log=log, keep_slabs=args.keep_slabs)
    wall = time.perf_counter() - t0

    nodes, elems, Y = _final_state(case, records)
    vtk_path = args.out / f"{case.name}_final.vtk"
    write_vtk_spatial(vtk_path, nodes, elems, Y)

    csv_path = args.out / f"{case.name}_line.csv"
    last = records[-1]
    if last.mesh is not None and last.solution is not None:
        lo = nodes.min(axis=0)
        hi = nodes.max(axis=0)
        mid = 0.5 * (lo + hi)
        start, end = lo.copy(), hi.copy()
        start[1:] = mid[1:]
        end[1:] = mid[1:]
        pts, vals = sample_line(last.mesh, last.solution.Y, start, end,
                                201, last.t_hi)
        write_csv(csv_path, pts, vals, Y.shape[1])

    newton_total = sum(r.report.iterations for r in records)
    linear_total = sum(sum(r.report.linear_iterations) for r in records)
    summary = {
        "case": case.name,
        "method": case.method,
        "slabs": len(records),
        "newton_iterations": newton_total,
        "linear_iterations": linear_total,
        "wall_seconds": f"{wall:.2f}",
        "pressure_min": f"{Y[:, 0].min():.6e}",
        "pressure_max": f"{Y[:, 0].max():.6e}",
        "vtk": str(vtk_path),
        "csv": str(csv_path),
    }
    for key, val in summary.items():
        log(f"{key} = {val}")
    return summary


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        run_case(args)
    except StflowError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
