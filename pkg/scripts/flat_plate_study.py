"""Supersonic flat-plate boundary-layer study (long-running).

Marches the Ma 3 / Re 1000 flat plate with a cold isothermal wall to a
steady state and writes the wall pressure-coefficient distribution plus
a VTK snapshot.  The coarse mesh (22400 triangles) takes on the order of
an hour single-core; medium and fine multiply the work by roughly 4x and
16x and exist for mesh-convergence studies, not for routine runs.

The expected steady wall C_p shows a single sharp peak at the plate
leading edge (x = 0), where the boundary layer displaces the supersonic
stream and induces a shock, followed by a monotone decay downstream.

Usage:
    python3 scripts/flat_plate_study.py [--resolution coarse|medium|fine]
        [--method fst|sst] [--t-end T] [--slabs N] [--out DIR]
        [--steady-tol TOL]

The run stops early once the relative change of the solution between
slabs drops below --steady-tol (default 1e-8).
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from stflow.assembly import SolverConfig, march_slabs  # noqa: E402
from stflow.cases import (  # noqa: E402
    build_flat_plate_case,
    pressure_coefficient,
)
from stflow.export import write_vtk_spatial  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--resolution", default="coarse",
                    choices=["coarse", "medium", "fine"])
    ap.add_argument("--method", default="fst", choices=["fst", "sst"])
    ap.add_argument("--t-end", type=float, default=4.0)
    ap.add_argument("--slabs", type=int, default=200)
    ap.add_argument("--steady-tol", type=float, default=1e-8)
    ap.add_argument("--out", type=Path, default=Path("flat_plate_out"))
    args = ap.parse_args()

    case = build_flat_plate_case(args.resolution, method=args.method,
                                 t_end=args.t_end, n_slabs=args.slabs)
    cfg = SolverConfig()
    cfg.newton.rel_tol = 1e-6
    args.out.mkdir(parents=True, exist_ok=True)

    # march manually so we can monitor the steady-state residual
    from stflow.assembly import SlabSolution, newton_solve_slab, precompute_slab
    from stflow.cases import build_slab_mesh

    spatial = case.spatial_mesh
    trace = np.array([case.initial_condition(x) for x in spatial.nodes])
    typ = case.typical_scale()
    t = case.t_start
    t_start_wall = time.perf_counter()
    for n in range(case.n_slabs):
        t_hi = case.t_start + (n + 1) * case.dt
        mesh = build_slab_mesh(case, t, t_hi)
        Y0 = trace[mesh.node_column]
        lower = np.zeros((mesh.n_nodes, 4))
        lower[mesh.lower_nodes] = trace
        pre = precompute_slab(mesh, case.boundary_spec, cfg, 4)
        sol, rep = newton_solve_slab(mesh, SlabSolution(Y=Y0, lower_trace=lower),
                                     case.boundary_spec, cfg, case.gas,
                                     typ=typ, pre=pre)
        new_trace = sol.Y[mesh.upper_nodes]
        change = np.abs(new_trace - trace) / typ
        rel_change = float(change.max())
        trace = new_trace
        wall = time.perf_counter() - t_start_wall
        print(f"slab {n:4d}  t = {t_hi:8.4f}  newton {rep.iterations}  "
              f"state change {rel_change:.3e}  elapsed {wall:7.1f} s", flush=True)
        t = t_hi
        if rel_change < args.steady_tol:
            print(f"steady state reached after {n + 1} slabs")
            break

    # wall C_p distribution
    wall_nodes = sorted(
        {int(v) for f, tag in zip(spatial.facet_nodes, spatial.facet_tags)
         if tag == "wall" for v in f},
        key=lambda v: spatial.nodes[v, 0])
    x = spatial.nodes[wall_nodes, 0]
    cp = pressure_coefficient(trace[wall_nodes, 0], case.params)
    out_csv = args.out / f"cp_wall_{args.resolution}.csv"
    np.savetxt(out_csv, np.column_stack([x, cp]), delimiter=",",
               header="x,cp", comments="")
    print(f"wrote {out_csv}")

    vtk = args.out / f"flat_plate_{args.resolution}.vtk"
    write_vtk_spatial(vtk, spatial.nodes, spatial.elements, trace)
    print(f"wrote {vtk}")

    peak = x[np.argmax(cp)]
    print(f"C_p peak {cp.max():.4f} at x = {peak:.4f} "
          f"(expected: single peak at the leading edge, monotone decay after)")


if __name__ == "__main__":
    main()
