"""Slab assembly, Newton-Raphson solve, Krylov solve, slab marching.

The stabilized weak form is assembled element-wise with the kernels in
stflow.kernels; element tangents are forward differences of the element
residual, so the assembled Jacobian is consistent with the assembled
residual by construction.  The lateral Neumann flux h is evaluated with
the previous Newton iterate and therefore only enters the right-hand
side.  Dirichlet data is enforced strongly: constrained nodal values are
written into the iterate and the corresponding rows/columns of the
linear system are replaced by identity/zero.
"""

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from . import kernels
from .errors import (
    KrylovStagnation,
    NewtonDiverged,
    NonPhysicalState,
    UnknownBoundaryTag,
)
from .mesh import SpaceTimeSlabMesh, facet_normal, generalized_cross
from .quadrature import gauss_legendre_01, quadrature_rule
from .simplex import covariant_metric, p1_basis, p1_basis_grad, regular_simplex_gram
from .stab import c_inv, fst_metric
from .simplex import MetricTensor

__all__ = [
    "SolverConfig",
    "BoundarySpec",
    "SlabSolution",
    "SlabPrecomp",
    "precompute_slab",
    "assemble_slab",
    "apply_dirichlet",
    "krylov_solve",
    "newton_solve_slab",
    "march_slabs",
]


@dataclass
class NewtonConfig:
    max_iter: int = 20
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8


@dataclass
class KrylovConfig:
    restart: int = 60
    max_iter: int = 2000
    tol: float = 1e-9
    preconditioner: str = "block_jacobi"   # block_jacobi | none
    method: str = "gmres"                  # gmres | direct (debugging/large UST)


@dataclass
class SolverConfig:
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    krylov: KrylovConfig = field(default_factory=KrylovConfig)
    quadrature_degree: int = 2
    threads: int = 1

    def __post_init__(self):
        if self.newton.abs_tol <= 0.0 or self.newton.rel_tol <= 0.0:
            raise ValueError("Newton tolerances must be positive")
        if self.krylov.restart < 1:
            raise ValueError("Krylov restart must be >= 1")


@dataclass
class BoundarySpec:
    """Per-tag Dirichlet data and viscous-boundary-integral flags.

    dirichlet maps tag -> sequence over the m primitive components with
    entries None (free), a constant, or a callable g(x, t).  viscous
    maps tag -> bool, selecting whether the stress/heat-flux parts of h
    are kept in the lateral boundary integral for that tag.  Fully
    Dirichlet facets get no boundary integral at all.
    """

    dirichlet: dict = field(default_factory=dict)
    viscous: dict = field(default_factory=dict)

    def check_tags(self, mesh_tags):
        known = set(mesh_tags)
        for tag in list(self.dirichlet) + list(self.viscous):
            if tag not in known:
                raise UnknownBoundaryTag(f"tag {tag!r} not among mesh tags {sorted(known)}")


@dataclass
class SlabSolution:
    """Nodal primitive unknowns on one slab plus the carried lower trace."""

    Y: np.ndarray              # (n_nodes, m)
    lower_trace: np.ndarray    # (n_nodes, m); meaningful on lower-interface nodes


@dataclass
class ConvergenceReport:
    iterations: int = 0
    residual_norms: list = field(default_factory=list)
    linear_iterations: list = field(default_factory=list)
    clipped: list = field(default_factory=list)
    converged: bool = False


# ---------------------------------------------------------------------------
# per-slab precomputation


@dataclass
class SlabPrecomp:
    m: int
    nsd: int
    n_en: int
    elems: np.ndarray
    qpw: np.ndarray
    qpN: np.ndarray
    qpdNdx: np.ndarray
    qpdNdt: np.ndarray
    G_all: np.ndarray
    cinv: float
    # jump facets
    jump_conn: np.ndarray
    jump_qpw: np.ndarray
    jump_qpN: np.ndarray
    jump_trace_basis: np.ndarray   # (nqf, d) facet P1 values, same for all facets
    # lateral facets (with boundary integral)
    lat_conn: np.ndarray
    lat_qpw: np.ndarray
    lat_qpN: np.ndarray
    lat_qpdNdx: np.ndarray
    lat_normals: np.ndarray
    lat_viscous: np.ndarray
    # Dirichlet
    dirichlet_mask: np.ndarray     # (n_nodes, m) bool
    dirichlet_vals: np.ndarray
    elem_dof: np.ndarray           # (n_el, n_en*m) global dof indices
    jump_dof: np.ndarray
    lat_dof: np.ndarray


def _element_geometry(mesh: SpaceTimeSlabMesh, degree):
    """Volume quadrature data arrays for simplex or prism slab elements."""
    d = mesh.dim
    nsd = mesh.nsd
    X = mesh.nodes[mesh.elements]                     # (n_el, n_en, d)
    n_el = mesh.n_elements

    if mesh.element_type == "simplex":
        pts, wts = quadrature_rule(d, degree)
        nq = len(wts)
        n_en = d + 1
        J = np.transpose(X[:, 1:, :] - X[:, :1, :], (0, 2, 1))
        detJ = np.linalg.det(J)
        Jinv = np.linalg.inv(J)
        dN_ref = p1_basis_grad(d)                     # (n_en, d)
        dN_phys = np.einsum("ak,ekj->eaj", dN_ref, Jinv)
        Nvals = np.array([p1_basis(p) for p in pts])  # (nq, n_en)
        qpw = wts[None, :] * np.abs(detJ)[:, None]
        qpN = np.broadcast_to(Nvals, (n_el, nq, n_en)).copy()
        qpdNdx = np.broadcast_to(dN_phys[:, None, :, :nsd], (n_el, nq, n_en, nsd)).copy()
        qpdNdt = np.broadcast_to(dN_phys[:, None, :, nsd], (n_el, nq, n_en)).copy()
        M = regular_simplex_gram(d)
        G_all = np.einsum("ekm,mp,epl->ekl", np.transpose(Jinv, (0, 2, 1)), M, Jinv)
        G_all = 0.5 * (G_all + np.transpose(G_all, (0, 2, 1)))
        return qpw, qpN, qpdNdx, qpdNdt, G_all

    # prism: tensor product of a spatial simplex rule and 2-point Gauss in time
    ns = nsd + 1
    dt = mesh.dt
    pts_s, wts_s = quadrature_rule(nsd, degree)
    pts_t, wts_t = gauss_legendre_01(2)
    nq = len(wts_s) * len(wts_t)
    n_en = 2 * ns
    Xs = X[:, :ns, :nsd]
    Js = np.transpose(Xs[:, 1:, :] - Xs[:, :1, :], (0, 2, 1))
    detJs = np.linalg.det(Js)
    Jinv_s = np.linalg.inv(Js)
    dchi_ref = p1_basis_grad(nsd)
    dchi_phys = np.einsum("ak,ekj->eaj", dchi_ref, Jinv_s)   # (n_el, ns, nsd)
    chi_vals = np.array([p1_basis(p) for p in pts_s])        # (nq_s, ns)

    qpw = np.empty((n_el, nq))
    qpN = np.empty((n_el, nq, n_en))
    qpdNdx = np.empty((n_el, nq, n_en, nsd))
    qpdNdt = np.empty((n_el, nq, n_en))
    q = 0
    for qs in range(len(wts_s)):
        for qt in range(len(wts_t)):
            th = pts_t[qt]
            w = wts_s[qs] * wts_t[qt] * dt
            qpw[:, q] = w * np.abs(detJs)
            qpN[:, q, :ns] = chi_vals[qs][None, :] * (1.0 - th)
            qpN[:, q, ns:] = chi_vals[qs][None, :] * th
            qpdNdx[:, q, :ns, :] = dchi_phys * (1.0 - th)
            qpdNdx[:, q, ns:, :] = dchi_phys * th
            qpdNdt[:, q, :ns] = chi_vals[qs][None, :] * (-1.0 / dt)
            qpdNdt[:, q, ns:] = chi_vals[qs][None, :] * (1.0 / dt)
            q += 1

    Ms = regular_simplex_gram(nsd) if nsd > 1 else np.array([[1.0]])
    Gs = np.einsum("ekm,mp,epl->ekl", np.transpose(Jinv_s, (0, 2, 1)), Ms, Jinv_s)
    G_all = np.zeros((n_el, nsd + 1, nsd + 1))
    G_all[:, :nsd, :nsd] = 0.5 * (Gs + np.transpose(Gs, (0, 2, 1)))
    G_all[:, nsd, nsd] = 4.0 / dt**2
    return qpw, qpN, qpdNdx, qpdNdt, G_all


def _owner_basis_at_points(mesh: SpaceTimeSlabMesh, owner, xq):
    """Owner-element basis values, spatial gradients at physical points xq."""
    nsd = mesh.nsd
    elem = mesh.elements[owner]
    Xe = mesh.nodes[elem]
    nq = xq.shape[0]
    if mesh.element_type == "simplex":
        d = mesh.dim
        J = (Xe[1:] - Xe[0]).T
        Jinv = np.linalg.inv(J)
        dN = p1_basis_grad(d) @ Jinv       # (n_en, d)
        N = np.empty((nq, d + 1))
        for q in range(nq):
            xi = Jinv @ (xq[q] - Xe[0])
            N[q] = p1_basis(xi)
        dNdx = np.broadcast_to(dN[None, :, :nsd], (nq, d + 1, nsd)).copy()
        return N, dNdx
    ns = nsd + 1
    dt = mesh.dt
    Xs = Xe[:ns, :nsd]
    if nsd == 1:
        Jinv_s = np.array([[1.0 / (Xs[1, 0] - Xs[0, 0])]])
    else:
        Js = (Xs[1:] - Xs[0]).T
        Jinv_s = np.linalg.inv(Js)
    dchi = p1_basis_grad(nsd) @ Jinv_s
    N = np.empty((nq, 2 * ns))
    dNdx = np.empty((nq, 2 * ns, nsd))
    for q in range(nq):
        xs = xq[q, :nsd]
        th = (xq[q, nsd] - mesh.t_lo) / dt
        xi = Jinv_s @ (xs - Xs[0])
        chi = p1_basis(xi)
        N[q, :ns] = chi * (1.0 - th)
        N[q, ns:] = chi * th
        dNdx[q, :ns, :] = dchi * (1.0 - th)
        dNdx[q, ns:, :] = dchi * th
    return N, dNdx


def _facet_quadrature(mesh, facets, degree):
    """Reference rule, physical points, and weights for simplex facets."""
    d = mesh.dim
    pts, wts = quadrature_rule(d - 1, degree)
    nq = len(wts)
    n_f = len(facets)
    Xf = mesh.nodes[facets]                       # (n_f, d, d)
    E = Xf[:, 1:, :] - Xf[:, :1, :]               # (n_f, d-1, d)
    xq = np.einsum("qa,fad->fqd", np.array([p1_basis(p) for p in pts]), Xf)
    areas = np.empty(n_f)
    for f in range(n_f):
        areas[f] = np.linalg.norm(generalized_cross(E[f]))
    qpw = wts[None, :] * areas[:, None]
    return pts, xq, qpw


def _build_dirichlet(mesh: SpaceTimeSlabMesh, bspec: BoundarySpec, m):
    mask = np.zeros((mesh.n_nodes, m), dtype=bool)
    vals = np.zeros((mesh.n_nodes, m))
    tag_nodes = {}
    for f, tag in zip(mesh.lateral_facets, mesh.lateral_facet_tags):
        tag_nodes.setdefault(tag, set()).update(int(v) for v in f)
    bspec.check_tags(tag_nodes.keys())
    for tag, comps in bspec.dirichlet.items():
        nodes = sorted(tag_nodes.get(tag, ()))
        if len(comps) != m:
            raise ValueError(f"Dirichlet spec for tag {tag!r} needs {m} entries")
        for node in nodes:
            x = mesh.nodes[node, : mesh.nsd]
            t = mesh.nodes[node, mesh.nsd]
            for c, g in enumerate(comps):
                if g is None:
                    continue
                mask[node, c] = True
                vals[node, c] = g(x, t) if callable(g) else float(g)
    return mask, vals


def precompute_slab(mesh: SpaceTimeSlabMesh, bspec: BoundarySpec,
                    cfg: SolverConfig, m=None) -> SlabPrecomp:
    """Geometry, quadrature, facet, and Dirichlet data reused across Newton."""
    nsd = mesh.nsd
    m = m or nsd + 2
    degree = cfg.quadrature_degree
    qpw, qpN, qpdNdx, qpdNdt, G_all = _element_geometry(mesh, degree)
    n_en = mesh.elements.shape[1]

    # jump facets: owner basis values at facet quadrature points
    pts_f, xq_j, jqpw = _facet_quadrature(mesh, mesh.lower_facets, degree)
    trace_basis = np.array([p1_basis(p) for p in pts_f])
    n_jf = len(mesh.lower_facets)
    jump_conn = mesh.elements[mesh.lower_facet_owner] if n_jf else \
        np.empty((0, n_en), dtype=np.int64)
    jump_qpN = np.empty((n_jf, len(trace_basis), n_en))
    for f in range(n_jf):
        N, _ = _owner_basis_at_points(mesh, mesh.lower_facet_owner[f], xq_j[f])
        jump_qpN[f] = N

    # lateral facets: skip fully Dirichlet ones
    keep = []
    for i, tag in enumerate(mesh.lateral_facet_tags):
        comps = bspec.dirichlet.get(tag)
        fully = comps is not None and all(g is not None for g in comps)
        if not fully:
            keep.append(i)
    keep = np.array(keep, dtype=np.int64)
    lat_facets = mesh.lateral_facets[keep] if len(keep) else \
        np.empty((0, mesh.dim), dtype=np.int64)
    lat_owner = mesh.lateral_facet_owner[keep] if len(keep) else \
        np.empty(0, dtype=np.int64)
    lat_tags = [mesh.lateral_facet_tags[i] for i in keep]
    n_lf = len(lat_facets)
    if n_lf:
        _, xq_l, lqpw = _facet_quadrature(mesh, lat_facets, degree)
        nql = lqpw.shape[1]
        lat_conn = mesh.elements[lat_owner]
        lat_qpN = np.empty((n_lf, nql, n_en))
        lat_qpdNdx = np.empty((n_lf, nql, n_en, nsd))
        lat_normals = np.empty((n_lf, nsd))
        for f in range(n_lf):
            N, dNdx = _owner_basis_at_points(mesh, lat_owner[f], xq_l[f])
            lat_qpN[f] = N
            lat_qpdNdx[f] = dNdx
            nrm = facet_normal(lat_facets[f], mesh, lat_owner[f])
            lat_normals[f] = nrm[:nsd]
        lat_viscous = np.array(
            [1 if bspec.viscous.get(tag, False) else 0 for tag in lat_tags],
            dtype=np.int64)
    else:
        nql = jqpw.shape[1] if n_jf else 1
        lqpw = np.empty((0, nql))
        lat_conn = np.empty((0, n_en), dtype=np.int64)
        lat_qpN = np.empty((0, nql, n_en))
        lat_qpdNdx = np.empty((0, nql, n_en, nsd))
        lat_normals = np.empty((0, nsd))
        lat_viscous = np.empty(0, dtype=np.int64)

    mask, vals = _build_dirichlet(mesh, bspec, m)

    def dof_indices(conn):
        if len(conn) == 0:
            return np.empty((0, conn.shape[1] * m), dtype=np.int64)
        return (conn[:, :, None] * m + np.arange(m)[None, None, :]).reshape(len(conn), -1)

    return SlabPrecomp(
        m=m, nsd=nsd, n_en=n_en,
        elems=mesh.elements,
        qpw=qpw, qpN=qpN, qpdNdx=qpdNdx, qpdNdt=qpdNdt, G_all=G_all,
        cinv=c_inv(nsd),
        jump_conn=jump_conn, jump_qpw=jqpw, jump_qpN=jump_qpN,
        jump_trace_basis=trace_basis,
        lat_conn=lat_conn, lat_qpw=lqpw, lat_qpN=lat_qpN,
        lat_qpdNdx=lat_qpdNdx, lat_normals=lat_normals, lat_viscous=lat_viscous,
        dirichlet_mask=mask, dirichlet_vals=vals,
        elem_dof=dof_indices(mesh.elements),
        jump_dof=dof_indices(jump_conn),
        lat_dof=dof_indices(lat_conn),
    )


def _jump_trace_values(mesh, pre: SlabPrecomp, lower_trace):
    """Carried trace interpolated at the jump quadrature points."""
    n_jf = len(mesh.lower_facets)
    nqf = pre.jump_trace_basis.shape[0]
    Ym = np.empty((n_jf, nqf, pre.m))
    for f in range(n_jf):
        vals = lower_trace[mesh.lower_facets[f]]
        Ym[f] = pre.jump_trace_basis @ vals
    return Ym


def assemble_slab(mesh, Y, lower_trace, pre: SlabPrecomp, gas, cfg,
                  typ, want_tangent=True):
    """Assemble global residual and (optionally) tangent on one slab.

    Returns (residual (n_dof,), matrix or None, clipped count).
    """
    m = pre.m
    n_dof_tot = mesh.n_nodes * m
    visc_params = gas.kernel_viscosity_params()
    source = np.zeros(m)

    res_e, tan_e, clip_e = kernels.element_loop(
        Y, pre.elems, pre.qpw, pre.qpN, pre.qpdNdx, pre.qpdNdt, pre.G_all,
        gas.R, gas.gamma, gas.Pr, gas.viscosity_model_id, visc_params,
        pre.cinv, source, typ, want_tangent)

    Ym = _jump_trace_values(mesh, pre, lower_trace)
    res_j, tan_j, clip_j = kernels.jump_loop(
        Y, pre.jump_conn, pre.jump_qpw, pre.jump_qpN, Ym,
        gas.R, gas.gamma, gas.Pr, typ, want_tangent)

    R = np.zeros(n_dof_tot)
    np.add.at(R, pre.elem_dof.ravel(), res_e.ravel())
    if len(pre.jump_conn):
        np.add.at(R, pre.jump_dof.ravel(), res_j.ravel())
    if len(pre.lat_conn):
        res_l = kernels.lateral_loop(
            Y, pre.lat_conn, pre.lat_qpw, pre.lat_qpN, pre.lat_qpdNdx,
            pre.lat_normals, pre.lat_viscous,
            gas.R, gas.gamma, gas.Pr, gas.viscosity_model_id, visc_params)
        np.add.at(R, pre.lat_dof.ravel(), res_l.ravel())

    A = None
    if want_tangent:
        blocks = [(pre.elem_dof, tan_e)]
        if len(pre.jump_conn):
            blocks.append((pre.jump_dof, tan_j))
        rows, cols, vals = [], [], []
        for dof, tan in blocks:
            n_b, nd, _ = tan.shape
            rows.append(np.repeat(dof, nd, axis=1).ravel())
            cols.append(np.tile(dof, (1, nd)).ravel())
            vals.append(tan.ravel())
        A = scipy.sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n_dof_tot, n_dof_tot)).tocsr()
    return R, A, int(clip_e + clip_j)


def apply_dirichlet(A, b, pre: SlabPrecomp):
    """Replace constrained rows/columns by identity/zero; zero the RHS there.

    Constrained values are already written into the iterate, so the
    Newton increment on those dofs is zero and column elimination drops
    out without a RHS correction.
    """
    cmask = pre.dirichlet_mask.ravel()
    if not cmask.any():
        return A, b
    keepd = scipy.sparse.diags((~cmask).astype(float))
    fixd = scipy.sparse.diags(cmask.astype(float))
    if A is not None:
        A = keepd @ A @ keepd + fixd
    b = np.where(cmask, 0.0, b)
    return A, b


def _block_jacobi(A, m):
    """Inverse node-block-diagonal preconditioner as a LinearOperator."""
    n = A.shape[0] // m
    B = A.tobsr(blocksize=(m, m))
    blocks = np.zeros((n, m, m))
    indptr, indices, data = B.indptr, B.indices, B.data
    for i in range(n):
        for k in range(indptr[i], indptr[i + 1]):
            if indices[k] == i:
                blocks[i] = data[k]
                break
    inv = np.linalg.inv(blocks)

    def apply(v):
        return np.einsum("nij,nj->ni", inv, v.reshape(n, m)).ravel()

    return scipy.sparse.linalg.LinearOperator(A.shape, matvec=apply)


def krylov_solve(A, b, cfg: SolverConfig):
    """Solve A x = b; restarted GMRES with optional block-Jacobi, or direct.

    Verifies the relative residual against cfg.krylov.tol and raises
    KrylovStagnation otherwise.  Returns (x, stats dict).
    """
    kc = cfg.krylov
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b), {"iterations": 0, "relres": 0.0}
    if kc.method == "direct":
        x = scipy.sparse.linalg.spsolve(A.tocsc(), b)
        relres = np.linalg.norm(A @ x - b) / bnorm
        if not np.isfinite(relres) or relres > max(kc.tol, 1e-8):
            raise KrylovStagnation(f"direct solve residual {relres:.3e}")
        return x, {"iterations": 1, "relres": float(relres)}

    M = None
    if kc.preconditioner == "block_jacobi":
        m = _infer_block_size(A, cfg)
        M = _block_jacobi(A, m)
    count = [0]

    def cb(_):
        count[0] += 1

    x, info = scipy.sparse.linalg.gmres(
        A, b, rtol=kc.tol, atol=0.0, restart=kc.restart,
        maxiter=max(1, kc.max_iter // kc.restart), M=M,
        callback=cb, callback_type="pr_norm")
    relres = np.linalg.norm(A @ x - b) / bnorm
    if info != 0 or relres > kc.tol * 10.0:
        raise KrylovStagnation(
            f"GMRES stagnation: info = {info}, relative residual {relres:.3e}")
    return x, {"iterations": count[0], "relres": float(relres)}


def _infer_block_size(A, cfg):
    return getattr(cfg, "_block_size", 4)


def newton_solve_slab(mesh, sol0: SlabSolution, bspec: BoundarySpec,
                      cfg: SolverConfig, gas, typ=None, pre=None, log=None):
    """Newton-Raphson on one slab; returns (SlabSolution, ConvergenceReport)."""
    m = mesh.nsd + 2
    if pre is None:
        pre = precompute_slab(mesh, bspec, cfg, m)
    cfg._block_size = m
    if typ is None:
        typ = np.maximum(np.abs(sol0.Y).max(axis=0), 1e-30)
    typ = np.asarray(typ, dtype=float)

    Y = sol0.Y.copy()
    if not np.all(np.isfinite(Y)):
        raise NonPhysicalState("non-finite initial guess")
    if np.any(Y[:, 0] <= 0.0) or np.any(Y[:, m - 1] <= 0.0):
        raise NonPhysicalState("initial guess has non-positive pressure or temperature")
    # enforce Dirichlet data on the iterate
    Y.ravel()[pre.dirichlet_mask.ravel()] = \
        pre.dirichlet_vals.ravel()[pre.dirichlet_mask.ravel()]

    report = ConvergenceReport()
    nc = cfg.newton
    norm0 = None
    growth = 0
    for it in range(nc.max_iter + 1):
        R, A, clipped = assemble_slab(mesh, Y, sol0.lower_trace, pre, gas, cfg,
                                      typ, want_tangent=True)
        A, R = apply_dirichlet(A, R, pre)
        norm = float(np.linalg.norm(R))
        report.residual_norms.append(norm)
        report.clipped.append(clipped)
        if log is not None:
            log(f"newton iter {it:2d}  residual {norm:.6e}  clipped {clipped}")
        if norm0 is None:
            norm0 = norm
        if norm < nc.abs_tol or norm < nc.rel_tol * norm0:
            if clipped:
                raise NonPhysicalState(
                    f"{clipped} clipped quadrature states at convergence")
            report.converged = True
            return SlabSolution(Y=Y, lower_trace=sol0.lower_trace), report
        if len(report.residual_norms) >= 2 and norm > report.residual_norms[-2]:
            growth += 1
            if growth >= 3:
                raise NewtonDiverged(
                    f"residual grew over 3 consecutive iterations: {report.residual_norms[-4:]}")
        else:
            growth = 0
        if it == nc.max_iter:
            break
        dy, stats = krylov_solve(A, -R, cfg)
        report.linear_iterations.append(stats["iterations"])
        report.iterations += 1
        Y += dy.reshape(Y.shape)
    raise NewtonDiverged(
        f"no convergence in {nc.max_iter} iterations, residual {report.residual_norms[-1]:.3e}")


@dataclass
class SlabRecord:
    index: int
    t_lo: float
    t_hi: float
    report: ConvergenceReport
    mesh: SpaceTimeSlabMesh = None
    solution: SlabSolution = None
    upper_trace: np.ndarray = None   # (n_spatial_nodes, m)


def march_slabs(case, cfg: SolverConfig, log=None, keep_slabs=False):
    """March the space-time slabs of a case sequentially.

    The upper trace of slab n becomes the lower trace (and the constant-
    in-time initial guess) of slab n+1.  A UST case with a single
    imported space-time mesh is solved in one shot.  Returns a list of
    SlabRecord.
    """
    from .cases import build_slab_mesh  # deferred: cases imports this module

    gas = case.gas
    typ = case.typical_scale()
    records = []

    if case.method == "ust":
        mesh = case.ust_mesh
        m = mesh.nsd + 2
        Y0 = np.array([case.initial_condition(x[: mesh.nsd])
                       for x in mesh.nodes])
        lower = Y0.copy()
        sol0 = SlabSolution(Y=Y0, lower_trace=lower)
        pre = precompute_slab(mesh, case.boundary_spec, cfg, m)
        sol, rep = newton_solve_slab(mesh, sol0, case.boundary_spec, cfg, gas,
                                     typ=typ, pre=pre, log=log)
        records.append(SlabRecord(index=0, t_lo=mesh.t_lo, t_hi=mesh.t_hi,
                                  report=rep, mesh=mesh, solution=sol))
        return records

    spatial = case.spatial_mesh
    n_spatial = spatial.n_nodes
    trace = np.array([case.initial_condition(x) for x in spatial.nodes])
    t = case.t_start
    for n in range(case.n_slabs):
        t_hi = case.t_start + (n + 1) * case.dt
        mesh = build_slab_mesh(case, t, t_hi)
        m = mesh.nsd + 2
        # constant-in-time extension of the previous upper trace
        Y0 = trace[mesh.node_column]
        lower_trace = np.zeros((mesh.n_nodes, m))
        lower_trace[mesh.lower_nodes] = trace
        sol0 = SlabSolution(Y=Y0, lower_trace=lower_trace)
        pre = precompute_slab(mesh, case.boundary_spec, cfg, m)
        t0 = time.perf_counter()
        sol, rep = newton_solve_slab(mesh, sol0, case.boundary_spec, cfg, gas,
                                     typ=typ, pre=pre, log=log)
        wall = time.perf_counter() - t0
        trace = sol.Y[mesh.upper_nodes]
        if log is not None:
            lin = sum(rep.linear_iterations)
            log(f"slab {n:4d}  [{t:.6g}, {t_hi:.6g}]  newton {rep.iterations}"
                f"  linear {lin}  wall {wall:.2f}s")
        rec = SlabRecord(index=n, t_lo=t, t_hi=t_hi, report=rep,
                         upper_trace=trace.copy())
        if keep_slabs or n == case.n_slabs - 1:
            rec.mesh = mesh
            rec.solution = sol
        records.append(rec)
        t = t_hi
    return records
