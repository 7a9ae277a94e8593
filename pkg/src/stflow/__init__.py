"""Simplex space-time finite element solver for compressible viscous flow.

Pressure-primitive Navier-Stokes with SUPG stabilization on space-time
slabs: flat extruded prisms (FST), simplex subdivisions with node-wise
temporal refinement (SST), or imported unstructured space-time meshes
(UST) solved in one coupled system.
"""

from ._accel import using_numba
from .assembly import BoundarySpec, SolverConfig, march_slabs, newton_solve_slab
from .cases import build_flat_plate_case, build_pulse_case
from .errors import StflowError
from .gas import GasProperties, air
from .mesh import SpatialMesh, SpaceTimeSlabMesh, extrude_fst, subdivide_sst, validate_conformity
from .mesh_io import import_ust, read_spatial_mesh

__all__ = [
    "using_numba",
    "BoundarySpec",
    "SolverConfig",
    "march_slabs",
    "newton_solve_slab",
    "build_flat_plate_case",
    "build_pulse_case",
    "StflowError",
    "GasProperties",
    "air",
    "SpatialMesh",
    "SpaceTimeSlabMesh",
    "extrude_fst",
    "subdivide_sst",
    "validate_conformity",
    "import_ust",
    "read_spatial_mesh",
]

__version__ = "0.1.0"
