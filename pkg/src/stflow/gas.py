"""Ideal-gas thermodynamics and transport laws.

Pressure-primitive state (p, u, T), ideal gas law p = rho R T, internal
energy e = R T / (gamma - 1).  Viscosity follows either Sutherland's
relation, the nondimensional modified law used by the flat-plate case,
or a constant value; thermal conductivity is coupled through a constant
Prandtl number.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NonPhysicalState

__all__ = [
    "PrimitiveState",
    "ConservedState",
    "GasProperties",
    "air",
    "primitive_to_conserved",
    "conserved_to_primitive",
    "speed_of_sound",
    "viscosity",
    "thermal_conductivity",
]

# Viscosity model identifiers, shared with the assembly kernels.
VISC_CONSTANT = 0
VISC_SUTHERLAND = 1
VISC_FLAT_PLATE = 2


@dataclass(frozen=True)
class PrimitiveState:
    p: float
    u: np.ndarray
    T: float

    def __post_init__(self):
        object.__setattr__(self, "u", np.atleast_1d(np.asarray(self.u, dtype=float)))
        if not (self.p > 0.0 and self.T > 0.0):
            raise NonPhysicalState(f"p = {self.p}, T = {self.T}")

    def as_vector(self):
        return np.concatenate(([self.p], self.u, [self.T]))


@dataclass(frozen=True)
class ConservedState:
    rho: float
    rho_u: np.ndarray
    rho_e: float


@dataclass(frozen=True)
class GasProperties:
    """Gas constants plus the configured viscosity law.

    viscosity_model is one of "constant", "sutherland", "flat_plate";
    viscosity_params holds (mu,) for constant and (mu_ref, T_ref, C)
    for Sutherland.
    """

    R: float = 287.0
    gamma: float = 1.4
    Pr: float = 0.71
    viscosity_model: str = "constant"
    viscosity_params: tuple = (0.0,)

    def __post_init__(self):
        if self.R <= 0.0 or self.gamma <= 1.0 or self.Pr <= 0.0:
            raise ValueError("require R > 0, gamma > 1, Pr > 0")
        if self.viscosity_model not in ("constant", "sutherland", "flat_plate"):
            raise ValueError(f"unknown viscosity model {self.viscosity_model!r}")

    @property
    def viscosity_model_id(self):
        return {"constant": VISC_CONSTANT, "sutherland": VISC_SUTHERLAND,
                "flat_plate": VISC_FLAT_PLATE}[self.viscosity_model]

    def kernel_viscosity_params(self):
        """Three-float parameter vector consumed by the assembly kernels."""
        params = np.zeros(3)
        params[: len(self.viscosity_params)] = self.viscosity_params
        return params


def air(viscosity_model="sutherland", viscosity_params=(21.7e-6, 373.15, 120.0)):
    """Air at standard conditions: R = 287 J/(kg K), gamma = 1.4, Pr = 0.71."""
    return GasProperties(R=287.0, gamma=1.4, Pr=0.71,
                         viscosity_model=viscosity_model,
                         viscosity_params=tuple(viscosity_params))


def primitive_to_conserved(y: PrimitiveState, g: GasProperties) -> ConservedState:
    """Map (p, u, T) to (rho, rho u, rho e) with the reduced (internal) energy."""
    rho = y.p / (g.R * y.T)
    return ConservedState(rho=rho, rho_u=rho * y.u, rho_e=y.p / (g.gamma - 1.0))


def conserved_to_primitive(c: ConservedState, g: GasProperties) -> PrimitiveState:
    if c.rho <= 0.0:
        raise NonPhysicalState(f"rho = {c.rho}")
    p = c.rho_e * (g.gamma - 1.0)
    T = p / (c.rho * g.R)
    return PrimitiveState(p=p, u=c.rho_u / c.rho, T=T)


def speed_of_sound(y: PrimitiveState, g: GasProperties) -> float:
    return float(np.sqrt(g.gamma * g.R * y.T))


def viscosity(T, g: GasProperties):
    """Dynamic viscosity at temperature T under the configured law."""
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0.0):
        raise NonPhysicalState("temperature must be positive")
    if g.viscosity_model == "constant":
        (mu,) = g.viscosity_params
        return np.broadcast_to(np.float64(mu), T.shape)[()] if T.shape else float(mu)
    if g.viscosity_model == "sutherland":
        mu_ref, T_ref, C = g.viscosity_params
        mu = mu_ref * (T_ref + C) / (T + C) * (T / T_ref) ** 1.5
    else:  # modified law of the flat-plate case, nondimensional units
        mu = 0.0906 * T**1.5 / (T + 0.0001406)
    return float(mu) if np.ndim(mu) == 0 else mu


def thermal_conductivity(mu, g: GasProperties):
    """kappa = mu c_p / Pr with c_p = gamma R / (gamma - 1)."""
    cp = g.gamma * g.R / (g.gamma - 1.0)
    return mu * cp / g.Pr
