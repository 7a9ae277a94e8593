"""Geometric kernels for d-simplices, d = 1..4.

Provides the linear (P1) nodal basis on the reference simplex, affine
element mappings and Jacobians, the equilateral ("regular") simplex of
unit Jacobian determinant, and the node-permutation-invariant covariant
metric tensor built through that regular simplex.  Everything here is a
pure function of its arguments.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

from .errors import DegenerateElement

__all__ = [
    "MetricTensor",
    "p1_basis",
    "p1_basis_grad",
    "element_jacobian",
    "regular_simplex_nodes",
    "regular_simplex_edge_length",
    "regular_simplex_gram",
    "covariant_metric",
    "covariant_metric_batch",
    "simplex_volume",
]


@dataclass(frozen=True)
class MetricTensor:
    """Covariant metric tensor of an element and its inverse."""

    g: np.ndarray
    g_inv: np.ndarray


def p1_basis(xi):
    """Values of the d+1 linear nodal basis functions at reference point xi.

    The first function is 1 - sum(xi); the others are the reference
    coordinates themselves.  Values always sum to one, also outside the
    reference simplex (linear extrapolation).
    """
    xi = np.asarray(xi, dtype=float)
    return np.concatenate(([1.0 - xi.sum()], xi))


def p1_basis_grad(d):
    """Constant reference-space gradients of the P1 basis, shape (d+1, d)."""
    grad = np.empty((d + 1, d))
    grad[0] = -1.0
    grad[1:] = np.eye(d)
    return grad


def _edge_scale(nodes):
    diffs = nodes[1:] - nodes[0]
    return float(np.sqrt((diffs**2).sum(axis=1).max()))


def element_jacobian(nodes):
    """Affine Jacobian of the simplex with rows `nodes`, shape (d+1, d).

    Column i is the distance vector from node 1 to node i+1.  Raises
    DegenerateElement when |det J| falls below 1e-14 * (max edge)^d.
    """
    nodes = np.asarray(nodes, dtype=float)
    d = nodes.shape[1]
    if nodes.shape[0] != d + 1:
        raise ValueError(f"simplex in {d}D needs {d + 1} nodes, got {nodes.shape[0]}")
    jac = (nodes[1:] - nodes[0]).T
    scale = _edge_scale(nodes)
    if scale == 0.0 or abs(np.linalg.det(jac)) < 1e-14 * scale**d:
        raise DegenerateElement(f"degenerate simplex, |det J| = {abs(np.linalg.det(jac)):.3e}")
    return jac


def regular_simplex_edge_length(d):
    """Edge length that gives the equilateral d-simplex unit Jacobian determinant."""
    return np.sqrt(2.0 * (d + 1) ** (-1.0 / d))


def _unit_equilateral(d):
    # Recursive construction: embed the (d-1)-dimensional equilateral
    # simplex at height 0 and place the new vertex above its centroid.
    nodes = np.zeros((2, 1))
    nodes[1, 0] = 1.0
    for k in range(2, d + 1):
        prev = np.hstack([nodes, np.zeros((k, 1))])
        centroid = prev.mean(axis=0)
        height = np.sqrt(1.0 - ((prev[0] - centroid) ** 2).sum())
        apex = centroid.copy()
        apex[-1] = height
        nodes = np.vstack([prev, apex])
    return nodes


@lru_cache(maxsize=None)
def _regular_simplex_nodes_cached(d):
    nodes = _unit_equilateral(d) * regular_simplex_edge_length(d)
    nodes.setflags(write=False)
    return nodes


def regular_simplex_nodes(d):
    """Vertices of the regular d-simplex with det(J) = 1, shape (d+1, d)."""
    if d not in (1, 2, 3, 4):
        raise ValueError(f"d must be in 1..4, got {d}")
    return _regular_simplex_nodes_cached(d)


@lru_cache(maxsize=None)
def _gram_cached(d):
    l2 = 2.0 * (d + 1) ** (-1.0 / d)
    m = l2 * 0.5 * (np.ones((d, d)) + np.eye(d))
    m.setflags(write=False)
    return m


def regular_simplex_gram(d):
    """Gram matrix M = J_r^T J_r of the regular d-simplex, M_ij = l^2 (1 + delta_ij)/2."""
    if d not in (1, 2, 3, 4):
        raise ValueError(f"d must be in 1..4, got {d}")
    return _gram_cached(d)


def covariant_metric(nodes):
    """Permutation-invariant covariant metric tensor of a simplex.

    G = J_k^{-T} M J_k^{-1} with M the Gram matrix of the regular
    simplex; identical for every numbering of the element nodes.
    """
    nodes = np.asarray(nodes, dtype=float)
    d = nodes.shape[1]
    jac_inv = np.linalg.inv(element_jacobian(nodes))
    g = jac_inv.T @ regular_simplex_gram(d) @ jac_inv
    g = 0.5 * (g + g.T)
    return MetricTensor(g=g, g_inv=np.linalg.inv(g))


def covariant_metric_batch(nodes):
    """Covariant metric tensors of a batch of simplices.

    nodes has shape (n, d+1, d); returns the (n, d, d) array of metric
    tensors G = J_k^{-T} M J_k^{-1} (no inverses are returned).
    """
    nodes = np.asarray(nodes, dtype=float)
    d = nodes.shape[2]
    jac = np.transpose(nodes[:, 1:, :] - nodes[:, :1, :], (0, 2, 1))
    det = np.linalg.det(jac)
    scale = np.sqrt(((nodes[:, 1:] - nodes[:, :1]) ** 2).sum(axis=2).max(axis=1))
    bad = np.abs(det) < 1e-14 * scale**d
    if np.any(bad):
        raise DegenerateElement(
            f"degenerate simplex at batch index {int(np.nonzero(bad)[0][0])}")
    jac_inv = np.linalg.inv(jac)
    m = regular_simplex_gram(d)
    g = np.einsum("ekm,mp,epl->ekl", np.transpose(jac_inv, (0, 2, 1)), m, jac_inv)
    return 0.5 * (g + np.transpose(g, (0, 2, 1)))


def simplex_volume(nodes):
    """Unsigned volume |det J| / d! of the simplex."""
    nodes = np.asarray(nodes, dtype=float)
    d = nodes.shape[1]
    jac = (nodes[1:] - nodes[0]).T
    return abs(np.linalg.det(jac)) / factorial(d)
