"""Generalized advective-diffusive form of the compressible equations.

Builds, at a single evaluation point, the quasi-linear system matrices
{A0, A_i^advnp, A_i^p, A_i^sp, K_ij} for the reduced-energy equations in
pressure-primitive variables, the pointwise strong residual, the Neumann
boundary flux vector h, and a direct flux-vector evaluation that serves
as the independent oracle for the matrix construction.

Variable ordering: (p, u_1 .. u_nsd, T); m = nsd + 2.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NonPhysicalState
from .gas import GasProperties, PrimitiveState, thermal_conductivity, viscosity

__all__ = [
    "StateGradient",
    "SystemMatrices",
    "system_matrices",
    "flux_oracle",
    "strong_residual",
    "neumann_flux",
]


@dataclass(frozen=True)
class StateGradient:
    """Spatial gradients dY[a, i] = dY_a/dx_i and time derivative dYdt[a]."""

    dY: np.ndarray
    dYdt: np.ndarray


@dataclass(frozen=True)
class SystemMatrices:
    A0: np.ndarray        # (m, m)
    A_advnp: np.ndarray   # (nsd, m, m)
    A_p: np.ndarray       # (nsd, m, m)
    A_sp: np.ndarray      # (nsd, m, m)
    K: np.ndarray         # (nsd, nsd, m, m)
    mu: float
    kappa: float


def _check_state(y: PrimitiveState):
    if not (y.p > 0.0 and y.T > 0.0):
        raise NonPhysicalState(f"p = {y.p}, T = {y.T}")


def _viscous_stress(du, mu):
    nsd = du.shape[0]
    return mu * (du + du.T) - (2.0 / 3.0) * mu * np.trace(du) * np.eye(nsd)


def system_matrices(y: PrimitiveState, grad: StateGradient, g: GasProperties) -> SystemMatrices:
    """Quasi-linear matrices of the generalized advective-diffusive system.

    A0 = dU/dY, A_i^advnp = dF_i^advnp/dY, A_i^p = dF_i^p/dY; A_i^sp and
    K_ij are constructed so that A_i^sp Y_,i = F^sp and K_ij Y_,j =
    F_i^diff.  A_sp depends on the current velocity gradient through the
    stress power.
    """
    _check_state(y)
    u = y.u
    nsd = u.shape[0]
    m = nsd + 2
    p, T = y.p, y.T
    R, gamma = g.R, g.gamma
    rho = p / (R * T)
    e = R * T / (gamma - 1.0)
    mu = float(viscosity(T, g))
    kappa = float(thermal_conductivity(mu, g))

    A0 = np.zeros((m, m))
    A0[0, 0] = 1.0 / (R * T)
    A0[0, m - 1] = -rho / T
    for j in range(nsd):
        A0[1 + j, 0] = u[j] / (R * T)
        A0[1 + j, 1 + j] = rho
        A0[1 + j, m - 1] = -rho * u[j] / T
    A0[m - 1, 0] = 1.0 / (gamma - 1.0)

    A_advnp = np.zeros((nsd, m, m))
    for i in range(nsd):
        A = A_advnp[i]
        A[0, 0] = u[i] / (R * T)
        A[0, 1 + i] = rho
        A[0, m - 1] = -rho * u[i] / T
        for j in range(nsd):
            A[1 + j, 0] = u[i] * u[j] / (R * T)
            A[1 + j, 1 + i] += rho * u[j]
            A[1 + j, 1 + j] += rho * u[i]
            A[1 + j, m - 1] = -rho * u[i] * u[j] / T
        A[m - 1, 0] = u[i] * e / (R * T)
        A[m - 1, 1 + i] = rho * e
        # d(rho u_i e)/dT = 0: rho e = p/(gamma-1) is independent of T.

    A_p = np.zeros((nsd, m, m))
    for i in range(nsd):
        A_p[i, 1 + i, 0] = 1.0

    du = grad.dY[1 : 1 + nsd, :]
    tau = _viscous_stress(du, mu)
    A_sp = np.zeros((nsd, m, m))
    for i in range(nsd):
        for j in range(nsd):
            A_sp[i, m - 1, 1 + j] = p * (1.0 if i == j else 0.0) - tau[i, j]

    K = np.zeros((nsd, nsd, m, m))
    for i in range(nsd):
        for j in range(nsd):
            for k in range(nsd):
                for l in range(nsd):
                    K[i, j, 1 + k, 1 + l] = mu * (
                        (k == l) * (i == j) + (j == k) * (i == l)
                    ) - (2.0 / 3.0) * mu * (k == i) * (l == j)
            K[i, j, m - 1, m - 1] = kappa * (i == j)

    return SystemMatrices(A0=A0, A_advnp=A_advnp, A_p=A_p, A_sp=A_sp, K=K,
                          mu=mu, kappa=kappa)


def flux_oracle(y: PrimitiveState, grad: StateGradient, g: GasProperties):
    """Direct evaluation of U and the four flux vectors from their definitions.

    Returns a dict with keys U, F_advnp, F_p, F_sp, F_diff; flux arrays
    have the spatial direction as the leading axis.
    """
    _check_state(y)
    u = y.u
    nsd = u.shape[0]
    m = nsd + 2
    rho = y.p / (g.R * y.T)
    e = g.R * y.T / (g.gamma - 1.0)
    mu = float(viscosity(y.T, g))
    kappa = float(thermal_conductivity(mu, g))

    U = np.concatenate(([rho], rho * u, [rho * e]))

    F_advnp = np.zeros((nsd, m))
    F_p = np.zeros((nsd, m))
    for i in range(nsd):
        F_advnp[i, 0] = rho * u[i]
        F_advnp[i, 1 : 1 + nsd] = rho * u[i] * u
        F_advnp[i, m - 1] = rho * u[i] * e
        F_p[i, 1 + i] = y.p

    du = grad.dY[1 : 1 + nsd, :]
    dT = grad.dY[m - 1, :]
    tau = _viscous_stress(du, mu)
    q = -kappa * dT

    F_sp = np.zeros(m)
    F_sp[m - 1] = y.p * np.trace(du) - np.tensordot(tau, du, axes=([0, 1], [1, 0]))

    F_diff = np.zeros((nsd, m))
    for i in range(nsd):
        F_diff[i, 1 : 1 + nsd] = tau[:, i]
        F_diff[i, m - 1] = -q[i]

    return {"U": U, "F_advnp": F_advnp, "F_p": F_p, "F_sp": F_sp, "F_diff": F_diff}


def strong_residual(y: PrimitiveState, grad: StateGradient, S, g: GasProperties):
    """Pointwise residual A0 Y_,t + (A^advnp + A^p + A^sp)_i Y_,i - S.

    For P1 (and prismatic PR1) interpolation the second-derivative
    diffusive term vanishes element-wise with transport coefficients
    frozen per point, so it is omitted here.
    """
    sm = system_matrices(y, grad, g)
    res = sm.A0 @ grad.dYdt
    for i in range(y.u.shape[0]):
        res += (sm.A_advnp[i] + sm.A_p[i] + sm.A_sp[i]) @ grad.dY[:, i]
    if S is not None:
        res = res - np.asarray(S, dtype=float)
    return res


def neumann_flux(y: PrimitiveState, grad: StateGradient, n, g: GasProperties,
                 viscous=True):
    """Boundary flux vector h = (0, -p n_k + tau_ki n_i, -q_i n_i).

    With viscous=False the stress and heat-flux parts are dropped,
    leaving only the pressure entries.
    """
    _check_state(y)
    n = np.asarray(n, dtype=float)
    u = y.u
    nsd = u.shape[0]
    m = nsd + 2
    h = np.zeros(m)
    h[1 : 1 + nsd] = -y.p * n
    if viscous:
        mu = float(viscosity(y.T, g))
        kappa = float(thermal_conductivity(mu, g))
        du = grad.dY[1 : 1 + nsd, :]
        tau = _viscous_stress(du, mu)
        q = -kappa * grad.dY[m - 1, :]
        h[1 : 1 + nsd] += tau @ n
        h[m - 1] = -q @ n
    return h
