"""Built-in verification cases: acoustic pressure pulse and laminar flat plate.

The pressure pulse is a right-running isentropic simple wave in air at
rest.  Before the shock forms, the exact solution follows from straight
characteristics x = xi + (u(xi) + c(xi)) t, which gives a semi-analytic
reference for error norms.  The flat plate is the viscous supersonic
boundary-layer benchmark in nondimensional units (Ma 3, Re 1000, cold
isothermal wall).
"""

from dataclasses import dataclass, field
from math import cos, pi, sqrt

import numpy as np

from .assembly import BoundarySpec
from .errors import ShockFormed
from .gas import GasProperties, air
from .mesh import SpatialMesh, extrude_fst, subdivide_sst

__all__ = [
    "CaseSpec",
    "PulseParams",
    "pulse_initial_condition",
    "shock_formation_time",
    "pulse_reference_solution",
    "build_pulse_case",
    "build_flat_plate_case",
    "pressure_coefficient",
    "structured_rectangle",
    "build_slab_mesh",
]


@dataclass
class CaseSpec:
    """Everything the slab marcher needs to run a case."""

    name: str
    method: str                      # fst | sst | ust
    gas: GasProperties
    initial_condition: object        # callable(x_spatial) -> Y (m,)
    boundary_spec: BoundarySpec
    spatial_mesh: SpatialMesh = None
    t_start: float = 0.0
    t_end: float = 0.0
    n_slabs: int = 0
    refine_level: np.ndarray = None  # per-spatial-node temporal level (SST)
    ust_mesh: object = None
    typ: np.ndarray = None
    params: object = None

    @property
    def dt(self):
        return (self.t_end - self.t_start) / self.n_slabs

    def typical_scale(self):
        return np.asarray(self.typ, dtype=float)


def build_slab_mesh(case: CaseSpec, t_lo, t_hi):
    if case.method == "fst":
        return extrude_fst(case.spatial_mesh, t_lo, t_hi)
    if case.method == "sst":
        return subdivide_sst(case.spatial_mesh, t_lo, t_hi, case.refine_level)
    raise ValueError(f"unknown marching method {case.method!r}")


# ---------------------------------------------------------------------------
# structured meshes


def structured_rectangle(x0, x1, y0, y1, nx, ny, tag_of=None):
    """Right-triangle mesh of [x0,x1] x [y0,y1] with nx x ny cells.

    tag_of(side, midpoint) -> str names each boundary facet; side is one
    of "left", "right", "bottom", "top".  Defaults to the side name.
    """
    if tag_of is None:
        tag_of = lambda side, mid: side
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    nodes = np.array([[x, y] for y in ys for x in xs])

    def nid(i, j):
        return j * (nx + 1) + i

    elements = []
    for j in range(ny):
        for i in range(nx):
            a, b = nid(i, j), nid(i + 1, j)
            c, d = nid(i + 1, j + 1), nid(i, j + 1)
            elements.append([a, b, c])
            elements.append([a, c, d])
    facets, tags = [], []

    def add(n0, n1, side):
        mid = 0.5 * (nodes[n0] + nodes[n1])
        facets.append([n0, n1])
        tags.append(tag_of(side, mid))

    for i in range(nx):
        add(nid(i, 0), nid(i + 1, 0), "bottom")
        add(nid(i, ny), nid(i + 1, ny), "top")
    for j in range(ny):
        add(nid(0, j), nid(0, j + 1), "left")
        add(nid(nx, j), nid(nx, j + 1), "right")
    return SpatialMesh(nodes=nodes, elements=np.array(elements, dtype=np.int64),
                       facet_nodes=np.array(facets, dtype=np.int64), facet_tags=tags)


def structured_interval(x0, x1, nx, left_tag="left", right_tag="right"):
    nodes = np.linspace(x0, x1, nx + 1).reshape(-1, 1)
    elements = np.array([[i, i + 1] for i in range(nx)], dtype=np.int64)
    facets = np.array([[0], [nx]], dtype=np.int64)
    return SpatialMesh(nodes=nodes, elements=elements, facet_nodes=facets,
                       facet_tags=[left_tag, right_tag])


# ---------------------------------------------------------------------------
# pressure pulse


@dataclass(frozen=True)
class PulseParams:
    """Isentropic pulse in air at rest; amplitude alpha, wavelength lam."""

    lam: float = 1.0
    alpha: float = 1.0 / (24.0 * pi)
    p0: float = 1.0e5
    T0: float = 273.15
    gas: GasProperties = field(default_factory=air)

    @property
    def c0(self):
        return sqrt(self.gas.gamma * self.gas.R * self.T0)

    def shape(self, x):
        """Initial perturbation profile S(x), supported on [lam, 2 lam]."""
        x = np.asarray(x, dtype=float)
        s = np.where((x >= self.lam) & (x <= 2.0 * self.lam),
                     self.alpha * (1.0 - np.cos(2.0 * pi * x / self.lam)), 0.0)
        return s


def pulse_initial_condition(params: PulseParams, x, nsd=2):
    """Primitive state of the right-running simple wave at t = 0."""
    g = params.gas.gamma
    s = float(params.shape(np.atleast_1d(np.asarray(x, dtype=float))[0]))
    p = params.p0 * (1.0 + s) ** (2.0 * g / (g - 1.0))
    u1 = 2.0 / (g - 1.0) * s * params.c0
    T = params.T0 * (1.0 + s) ** 2
    Y = np.zeros(nsd + 2)
    Y[0] = p
    Y[1] = u1
    Y[-1] = T
    return Y


def shock_formation_time(params: PulseParams):
    """Time at which the characteristics of the pulse first cross."""
    g = params.gas.gamma
    return (g - 1.0) / (g + 1.0) / (2.0 * pi * params.alpha) * params.lam / params.c0


def pulse_reference_solution(params: PulseParams, x, t, n_xi=20001):
    """Exact pre-shock solution (p, u1, T) at positions x and time t.

    Traces characteristics from a fine grid of foot points and inverts
    the (monotone) map by interpolation.  Raises ShockFormed once the
    map stops being monotone, i.e. for t >= the shock formation time.
    """
    g = params.gas.gamma
    x = np.asarray(x, dtype=float)
    xi = np.linspace(0.0, params.lam * 2.5 + (params.c0 * 2.5) * t, n_xi)
    s = params.shape(xi)
    u = 2.0 / (g - 1.0) * s * params.c0
    c = params.c0 * (1.0 + s)
    xt = xi + (u + c) * t
    if np.any(np.diff(xt) <= 0.0):
        raise ShockFormed(
            f"characteristics cross before t = {t:.6g} "
            f"(shock forms at t = {shock_formation_time(params):.6g})")
    s_at = np.interp(x, xt, s)
    p = params.p0 * (1.0 + s_at) ** (2.0 * g / (g - 1.0))
    u1 = 2.0 / (g - 1.0) * s_at * params.c0
    T = params.T0 * (1.0 + s_at) ** 2
    return p, u1, T


def build_pulse_case(method="fst", cfl=2.0, elems_per_lambda=100,
                     params: PulseParams = None, refine_level=None,
                     ust_mesh=None) -> CaseSpec:
    """Quasi-1D pulse case on [0, 4 lam]; final time lam / c0.

    FST/SST run on a one-cell-high strip of 2 * 4 * elems_per_lambda
    triangles; the inviscid gas makes the strip exactly one-dimensional.
    A UST case solves an imported (1+1)-dimensional space-time mesh in a
    single coupled system.
    """
    params = params or PulseParams(gas=air(viscosity_model="constant",
                                           viscosity_params=(0.0,)))
    lam, c0 = params.lam, params.c0
    t_end = lam / c0
    rest = [params.p0, 0.0, 0.0, params.T0]

    if method == "ust":
        bspec = BoundarySpec(dirichlet={
            "left": [params.p0, 0.0, params.T0],
            "right": [params.p0, 0.0, params.T0],
        })
        return CaseSpec(
            name="pressure-pulse-ust", method="ust", gas=params.gas,
            initial_condition=lambda x: pulse_initial_condition(params, x, nsd=1),
            boundary_spec=bspec, ust_mesh=ust_mesh,
            t_start=0.0, t_end=t_end,
            typ=np.array([params.p0, c0, params.T0]), params=params)

    nx = 4 * elems_per_lambda
    dx = 4.0 * lam / nx
    spatial = structured_rectangle(0.0, 4.0 * lam, 0.0, lam / 100.0, nx, 1)
    n_slabs = max(1, round(t_end / (cfl * dx / c0)))
    bspec = BoundarySpec(dirichlet={
        "left": rest,
        "right": rest,
        "bottom": [None, None, 0.0, None],
        "top": [None, None, 0.0, None],
    })
    levels = None
    if method == "sst":
        levels = np.zeros(spatial.n_nodes, dtype=np.int64) if refine_level is None \
            else np.asarray(refine_level, dtype=np.int64)
    return CaseSpec(
        name=f"pressure-pulse-{method}", method=method, gas=params.gas,
        spatial_mesh=spatial,
        initial_condition=lambda x: pulse_initial_condition(params, x, nsd=2),
        boundary_spec=bspec, t_start=0.0, t_end=t_end, n_slabs=n_slabs,
        refine_level=levels,
        typ=np.array([params.p0, c0, c0, params.T0]), params=params)


# ---------------------------------------------------------------------------
# flat plate


@dataclass(frozen=True)
class FlatPlateParams:
    """Nondimensional Ma 3 / Re 1000 flat plate with a cold isothermal wall."""

    p_in: float = 7.937e-2
    u_in: float = 1.0
    T_in: float = 2.769e-4
    T_wall: float = 7.754e-4
    gas: GasProperties = field(default_factory=lambda: air(viscosity_model="flat_plate"))


_PLATE_CELLS = {"coarse": (140, 80), "medium": (280, 160), "fine": (560, 320)}


def build_flat_plate_case(resolution="coarse", method="fst", t_end=4.0,
                          n_slabs=200, params: FlatPlateParams = None) -> CaseSpec:
    """Supersonic flat plate on [-0.2, 1.2] x [0, 0.8]; plate at y=0, x>=0.

    Marched in time to a steady state; the inflow state is supersonic so
    all components are prescribed on the left and top boundaries.
    """
    params = params or FlatPlateParams()
    nx, ny = _PLATE_CELLS[resolution]

    def tag_of(side, mid):
        if side == "bottom":
            return "wall" if mid[0] >= 0.0 else "symmetry"
        if side == "left":
            return "inflow"
        if side == "right":
            return "outflow"
        return "farfield"

    spatial = structured_rectangle(-0.2, 1.2, 0.0, 0.8, nx, ny, tag_of)
    inflow = [params.p_in, params.u_in, 0.0, params.T_in]
    bspec = BoundarySpec(
        dirichlet={
            "inflow": inflow,
            "farfield": inflow,
            "wall": [None, 0.0, 0.0, params.T_wall],
            "symmetry": [None, None, 0.0, None],
        },
        viscous={"outflow": True, "wall": True},
    )

    def ic(x):
        return np.array(inflow)

    levels = np.zeros(spatial.n_nodes, dtype=np.int64) if method == "sst" else None
    return CaseSpec(
        name=f"flat-plate-{resolution}", method=method, gas=params.gas,
        spatial_mesh=spatial, initial_condition=ic, boundary_spec=bspec,
        t_start=0.0, t_end=t_end, n_slabs=n_slabs, refine_level=levels,
        typ=np.array([params.p_in, params.u_in, params.u_in, params.T_in]),
        params=params)


def pressure_coefficient(p, params: FlatPlateParams = None):
    """C_p = 2 (p - p_inf) / (rho_inf |u_inf|^2)."""
    params = params or FlatPlateParams()
    rho_inf = params.p_in / (params.gas.R * params.T_in)
    return 2.0 * (np.asarray(p) - params.p_in) / (rho_inf * params.u_in**2)
