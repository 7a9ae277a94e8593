"""SUPG stabilization: hatted matrices and the element tau matrix.

tau is the principal inverse square root of
G_mp A^_m A^_p + C_inv^2 G_ij G_kl K^_ik K^_lj, where the hatted
matrices map the system to conservation-variable form and G is the
permutation-invariant covariant metric tensor of the space-time
element.  The square root uses the complex Schur decomposition with the
triangular recurrence; symmetric input takes an eigendecomposition fast
path.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NonPositiveTimeStep, SingularA0, SquareRootFailure
from .fluxes import SystemMatrices
from .simplex import MetricTensor

__all__ = [
    "HattedMatrices",
    "hatted_matrices",
    "matrix_sqrt_principal",
    "tau_element",
    "tau_elements",
    "c_inv",
    "fst_metric",
]


@dataclass(frozen=True)
class HattedMatrices:
    """Combined advection and diffusion matrices in conservation form.

    A_hat[i] = (A_i^advnp + A_i^p + A_i^sp) A0^{-1}; the temporal
    advection matrix is the identity.  K_hat[i, j] = K_ij A0^{-1}.
    """

    A_hat: np.ndarray   # (nsd, m, m)
    K_hat: np.ndarray   # (nsd, nsd, m, m)


def hatted_matrices(sm: SystemMatrices) -> HattedMatrices:
    m = sm.A0.shape[0]
    nsd = m - 2
    try:
        A0_inv = np.linalg.inv(sm.A0)
    except np.linalg.LinAlgError as exc:
        raise SingularA0(str(exc)) from exc
    A_hat = np.empty((nsd, m, m))
    for i in range(nsd):
        A_hat[i] = (sm.A_advnp[i] + sm.A_p[i] + sm.A_sp[i]) @ A0_inv
    K_hat = np.empty((nsd, nsd, m, m))
    for i in range(nsd):
        for j in range(nsd):
            K_hat[i, j] = sm.K[i, j] @ A0_inv
    return HattedMatrices(A_hat=A_hat, K_hat=K_hat)


def _sqrt_triangular(T):
    n = T.shape[0]
    U = np.zeros_like(T)
    diag = np.diag(T)
    on_negative_axis = (diag.real <= 0.0) & (np.abs(diag.imag) <= 1e-14 * np.abs(diag.real))
    if np.any(on_negative_axis) or np.any(diag == 0.0):
        raise SquareRootFailure("eigenvalue on the closed negative real axis")
    for i in range(n):
        U[i, i] = np.sqrt(diag[i])
    for j in range(1, n):
        for i in range(j - 1, -1, -1):
            s = T[i, j] - U[i, i + 1 : j] @ U[i + 1 : j, j]
            denom = U[i, i] + U[j, j]
            if denom == 0.0:
                raise SquareRootFailure("zero diagonal pair in triangular recurrence")
            U[i, j] = s / denom
    return U


def matrix_sqrt_principal(A):
    """Principal square root S of A, S @ S = A, spectrum in the right half-plane.

    Requires that A has no eigenvalues on the closed negative real axis.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("square matrix required")
    if np.allclose(A, A.T, rtol=0.0, atol=1e-13 * max(1.0, np.abs(A).max())):
        w, V = np.linalg.eigh(0.5 * (A + A.T))
        if w.min() <= 0.0:
            raise SquareRootFailure(f"symmetric input not positive definite (min eig {w.min():.3e})")
        return (V * np.sqrt(w)) @ V.T
    T, Z = scipy.linalg.schur(A.astype(complex), output="complex")
    U = _sqrt_triangular(T)
    S = Z @ U @ Z.conj().T
    if not np.all(np.isfinite(S)):
        raise SquareRootFailure("non-finite entries in square root")
    return S.real


def c_inv(nsd, transient=True):
    """Inverse-estimate constant scaling the diffusive part of tau.

    (nsd+1)^2 (nsd+2); the underlying estimate lives on the spatial
    reference simplex shared by all discretization methods, so the value
    does not depend on the transient flag.
    """
    if nsd not in (1, 2, 3):
        raise ValueError(f"nsd must be 1..3, got {nsd}")
    return float((nsd + 1) ** 2 * (nsd + 2))


def fst_metric(spatial_g: MetricTensor, dt) -> MetricTensor:
    """Space-time metric of a flat (extruded) element: spatial block plus 4/dt^2."""
    if not dt > 0.0:
        raise NonPositiveTimeStep(f"dt = {dt}")
    nsd = spatial_g.g.shape[0]
    g = np.zeros((nsd + 1, nsd + 1))
    g[:nsd, :nsd] = spatial_g.g
    g[nsd, nsd] = 4.0 / dt**2
    return MetricTensor(g=g, g_inv=np.linalg.inv(g))


def tau_argument(hm: HattedMatrices, G, cinv, transient=True):
    """The matrix whose principal inverse square root is tau."""
    G = G.g if isinstance(G, MetricTensor) else np.asarray(G, dtype=float)
    nsd = hm.A_hat.shape[0]
    m = hm.A_hat.shape[1]
    nst = nsd + 1 if transient else nsd
    if G.shape != (nst, nst):
        raise ValueError(f"metric tensor shape {G.shape} incompatible with nst = {nst}")
    # Advection matrices with the identity appended in the time slot.
    A = np.empty((nst, m, m))
    A[:nsd] = hm.A_hat
    if transient:
        A[nsd] = np.eye(m)
    B = np.zeros((m, m))
    for a in range(nst):
        for b in range(nst):
            if G[a, b] != 0.0:
                B += G[a, b] * (A[a] @ A[b])
    for i in range(nsd):
        for j in range(nsd):
            for k in range(nsd):
                for l in range(nsd):
                    gg = G[i, j] * G[k, l]
                    if gg != 0.0:
                        B += cinv**2 * gg * (hm.K_hat[i, k] @ hm.K_hat[l, j])
    return B


def tau_element(hm: HattedMatrices, G, cinv, transient=True):
    """Element stabilization matrix tau, inverse principal square root of tau_argument."""
    B = tau_argument(hm, G, cinv, transient=transient)
    S = matrix_sqrt_principal(B)
    # sqrt then solve, rather than forming the explicit inverse.
    return np.linalg.solve(S, np.eye(B.shape[0]))


def tau_elements(hm: HattedMatrices, metrics, cinv):
    """tau for a batch of space-time metric tensors at one fixed state.

    metrics is an (n, nsd+1, nsd+1) array (or a sequence of
    MetricTensor); the computation runs through the same compiled kernel
    used during assembly.  Returns an (n, m, m) array.
    """
    from . import kernels

    nsd = hm.A_hat.shape[0]
    m = hm.A_hat.shape[1]
    if not isinstance(metrics, np.ndarray):
        metrics = np.array([g.g if isinstance(g, MetricTensor) else g
                            for g in metrics])
    metrics = np.ascontiguousarray(metrics, dtype=float)
    if metrics.ndim != 3 or metrics.shape[1:] != (nsd + 1, nsd + 1):
        raise ValueError(f"metric batch shape {metrics.shape} incompatible "
                         f"with nst = {nsd + 1}")
    A = np.empty((nsd + 1, m, m))
    A[:nsd] = hm.A_hat
    A[nsd] = np.eye(m)
    use_k = bool(np.any(hm.K_hat))
    return kernels.tau_loop(A, np.ascontiguousarray(hm.K_hat), metrics,
                            float(cinv), use_k)
