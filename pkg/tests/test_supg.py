"""Stabilization: principal matrix square root, metric tensors, tau."""

import itertools

import numpy as np
import pytest

from stflow.errors import NonPositiveTimeStep, SquareRootFailure
from stflow.fluxes import system_matrices
from stflow.simplex import MetricTensor, covariant_metric
from stflow.stab import (
    c_inv,
    fst_metric,
    hatted_matrices,
    matrix_sqrt_principal,
    tau_argument,
    tau_element,
)

from conftest import random_gradient, random_state


# ---------------------------------------------------------------------------
# principal square root


def random_spd(rng, n, cond=1e4):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    w = np.geomspace(1.0, cond, n)
    return (q * w) @ q.T


def random_right_half_plane(rng, n):
    """Random matrix with spectrum in the open right half-plane."""
    a = rng.standard_normal((n, n))
    # shift until all eigenvalues have positive real part
    shift = max(0.0, -np.linalg.eigvals(a).real.min()) + 0.5
    return a + shift * np.eye(n)


def test_sqrt_symmetric_matches_eigendecomposition(rng):
    for _ in range(50):
        n = rng.integers(2, 7)
        a = random_spd(rng, n)
        s = matrix_sqrt_principal(a)
        w, v = np.linalg.eigh(a)
        s_ref = (v * np.sqrt(w)) @ v.T
        assert np.abs(s - s_ref).max() < 1e-11 * np.abs(s_ref).max()


def test_sqrt_residual_nonsymmetric(rng):
    for _ in range(100):
        n = rng.integers(2, 7)
        a = random_right_half_plane(rng, n)
        s = matrix_sqrt_principal(a)
        rel = np.linalg.norm(s @ s - a) / np.linalg.norm(a)
        assert rel < 1e-10
        # principal branch: spectrum in the right half-plane
        assert np.linalg.eigvals(s).real.min() > 0.0


def test_sqrt_known_values():
    assert np.allclose(matrix_sqrt_principal(4.0 * np.eye(3)), 2.0 * np.eye(3))
    a = np.array([[4.0, 1.0], [0.0, 9.0]])
    s = matrix_sqrt_principal(a)
    # upper-triangular square root: diag (2, 3), off-diagonal 1/(2+3)
    assert np.allclose(s, [[2.0, 0.2], [0.0, 3.0]], atol=1e-13)


def test_sqrt_rejects_negative_axis_spectrum():
    with pytest.raises(SquareRootFailure):
        matrix_sqrt_principal(-np.eye(2))
    with pytest.raises(SquareRootFailure):
        matrix_sqrt_principal(np.diag([1.0, 0.0]))
    with pytest.raises(ValueError):
        matrix_sqrt_principal(np.zeros((2, 3)))


# ---------------------------------------------------------------------------
# inverse-estimate constant and metrics


def test_c_inv_values():
    # (nsd + 1)^2 (nsd + 2)
    assert c_inv(1) == 12.0
    assert c_inv(2) == 36.0
    assert c_inv(3) == 80.0
    assert c_inv(2, transient=False) == 36.0
    with pytest.raises(ValueError):
        c_inv(4)


def test_fst_metric_block_structure(rng):
    gs = random_spd(rng, 2)
    metric = fst_metric(MetricTensor(g=gs, g_inv=np.linalg.inv(gs)), dt=0.1)
    assert np.allclose(metric.g[:2, :2], gs)
    assert metric.g[2, 2] == pytest.approx(4.0 / 0.01)
    assert np.allclose(metric.g[2, :2], 0.0)
    assert np.allclose(metric.g @ metric.g_inv, np.eye(3), atol=1e-12)
    with pytest.raises(NonPositiveTimeStep):
        fst_metric(MetricTensor(g=gs, g_inv=np.linalg.inv(gs)), dt=0.0)


# ---------------------------------------------------------------------------
# hatted matrices and tau


def test_hatted_matrices_identity(rng):
    from stflow.gas import air

    g = air()
    y = random_state(rng, 2)
    grad = random_gradient(rng, 2)
    sm = system_matrices(y, grad, g)
    hm = hatted_matrices(sm)
    for i in range(2):
        combined = sm.A_advnp[i] + sm.A_p[i] + sm.A_sp[i]
        assert np.allclose(hm.A_hat[i] @ sm.A0, combined, rtol=1e-10)
        for j in range(2):
            assert np.allclose(hm.K_hat[i, j] @ sm.A0, sm.K[i, j], rtol=1e-10)


def _random_simplex(rng, d):
    while True:
        nodes = rng.uniform(-1.0, 1.0, size=(d + 1, d))
        jac = (nodes[1:] - nodes[0]).T
        if abs(np.linalg.det(jac)) > 0.05:
            return nodes


@pytest.mark.parametrize("d", [2, 3, 4])
def test_tau_permutation_invariant(d):
    nsd = d - 1
    from stflow.gas import air

    g = air()
    rng = np.random.default_rng(20240000 + d)
    cinv = c_inv(nsd)
    for _ in range(5):
        nodes = _random_simplex(rng, d)
        y = random_state(rng, nsd)
        grad = random_gradient(rng, nsd)
        hm = hatted_matrices(system_matrices(y, grad, g))
        tau0 = tau_element(hm, covariant_metric(nodes), cinv)
        for perm in itertools.permutations(range(d + 1)):
            tau = tau_element(hm, covariant_metric(nodes[list(perm)]), cinv)
            assert np.abs(tau - tau0).max() < 1e-10 * np.abs(tau0).max()


def test_tau_inverts_square_root(rng):
    from stflow.gas import air

    g = air()
    y = random_state(rng, 2)
    grad = random_gradient(rng, 2)
    hm = hatted_matrices(system_matrices(y, grad, g))
    nodes = _random_simplex(rng, 3)
    metric = covariant_metric(nodes)
    B = tau_argument(hm, metric, c_inv(2))
    tau = tau_element(hm, metric, c_inv(2))
    # tau = B^{-1/2}: the inverse of tau, squared, recovers B
    S = np.linalg.inv(tau)
    assert np.linalg.norm(S @ S - B) < 1e-8 * np.linalg.norm(B)


def test_tau_steady_uses_spatial_metric_only(rng):
    from stflow.gas import air

    g = air()
    y = random_state(rng, 2)
    grad = random_gradient(rng, 2)
    hm = hatted_matrices(system_matrices(y, grad, g))
    gs = random_spd(rng, 2, cond=10.0)
    tau = tau_element(hm, gs, c_inv(2), transient=False)
    assert tau.shape == (4, 4)
    with pytest.raises(ValueError):
        tau_element(hm, gs, c_inv(2), transient=True)  # 3x3 metric required


def test_tau_scaling_with_element_size(rng):
    """Uniformly refining the element scales tau linearly (advective limit)."""
    from stflow.gas import air

    g = air(viscosity_model="constant", viscosity_params=(0.0,))
    y = random_state(rng, 1)
    grad = random_gradient(rng, 1, scale=0.0)
    hm = hatted_matrices(system_matrices(y, grad, g))
    nodes = _random_simplex(rng, 2)
    tau1 = tau_element(hm, covariant_metric(nodes), c_inv(1))
    tau2 = tau_element(hm, covariant_metric(0.5 * nodes), c_inv(1))
    assert np.allclose(tau2, 0.5 * tau1, rtol=1e-9)


def test_tau_batch_matches_scalar_path(rng):
    """The compiled batch tau agrees with the Schur-based reference path."""
    from stflow.gas import air
    from stflow.stab import tau_elements

    for gas in (air(), air(viscosity_model="constant", viscosity_params=(0.0,))):
        y = random_state(rng, 2)
        grad = random_gradient(rng, 2)
        hm = hatted_matrices(system_matrices(y, grad, gas))
        metrics = [covariant_metric(_random_simplex(rng, 3)) for _ in range(8)]
        batch = tau_elements(hm, metrics, c_inv(2))
        for k, metric in enumerate(metrics):
            ref = tau_element(hm, metric, c_inv(2))
            assert np.abs(batch[k] - ref).max() < 1e-9 * np.abs(ref).max()


def test_kernel_inverse_sqrt_matches_reference(rng):
    """The eigendecomposition kernel agrees with the Schur-based reference."""
    from stflow import kernels

    for _ in range(50):
        n = rng.integers(2, 6)
        b = random_right_half_plane(rng, n) + n * np.eye(n)
        ref = np.linalg.solve(matrix_sqrt_principal(b), np.eye(n))
        got = kernels._inv_principal_sqrt(b)
        assert np.abs(got - ref).max() < 1e-9 * np.abs(ref).max()
