"""Compare the compiled (numba) and pure-numpy assembly kernel paths.

Runs the same small pressure-pulse slab assembly repeatedly in a
subprocess for each path (the kernel path is fixed at import time by the
STFLOW_DISABLE_NUMBA environment variable) and reports wall times and
the maximum deviation between the two assembled residuals.

Usage: python3 scripts/benchmark_kernels.py [repeats]
"""

import json
import os
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

WORKER = r"""
import json, sys, time
import numpy as np
from stflow.assembly import SolverConfig, assemble_slab, precompute_slab
from stflow.cases import build_pulse_case
from stflow.mesh import extrude_fst
import stflow

repeats = int(sys.argv[1])
case = build_pulse_case("fst", elems_per_lambda=25)
cfg = SolverConfig()
mesh = extrude_fst(case.spatial_mesh, 0.0, case.dt)
pre = precompute_slab(mesh, case.boundary_spec, cfg, 4)
Y = np.array([case.initial_condition(x[:2]) for x in mesh.nodes])
trace = Y.copy()
typ = case.typical_scale()

# warm-up (includes JIT compilation on the compiled path)
t0 = time.perf_counter()
R, A, _ = assemble_slab(mesh, Y, trace, pre, case.gas, cfg, typ)
warmup = time.perf_counter() - t0

t0 = time.perf_counter()
for _ in range(repeats):
    R, A, _ = assemble_slab(mesh, Y, trace, pre, case.gas, cfg, typ)
elapsed = (time.perf_counter() - t0) / repeats
print(json.dumps({
    "numba": stflow.using_numba(),
    "warmup_s": warmup,
    "per_assembly_s": elapsed,
    "residual_norm": float(np.linalg.norm(R)),
    "residual_sample": R[: 8].tolist(),
}))
"""


def run(disable_numba, repeats):
    env = dict(os.environ)
    env["STFLOW_DISABLE_NUMBA"] = "1" if disable_numba else "0"
    out = subprocess.run(
        [sys.executable, "-c", WORKER, str(repeats)],
        capture_output=True, text=True, env=env, cwd=ROOT, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 5
    print(f"assembling one pressure-pulse slab (100x1 cells), {repeats} repeats per path")
    compiled = run(False, repeats)
    fallback = run(True, max(1, repeats // 5))
    for name, r in (("numba", compiled), ("numpy", fallback)):
        print(f"{name:6s}: {r['per_assembly_s'] * 1e3:10.1f} ms/assembly "
              f"(warm-up {r['warmup_s']:.2f} s, numba={r['numba']})")
    speedup = fallback["per_assembly_s"] / compiled["per_assembly_s"]
    print(f"speedup: {speedup:.1f}x")
    diff = max(abs(a - b) for a, b in
               zip(compiled["residual_sample"], fallback["residual_sample"]))
    rel = abs(compiled["residual_norm"] - fallback["residual_norm"]) / \
        max(compiled["residual_norm"], 1e-300)
    print(f"residual agreement: norm rel diff {rel:.3e}, "
          f"first-entries max abs diff {diff:.3e}")


if __name__ == "__main__":
    main()
