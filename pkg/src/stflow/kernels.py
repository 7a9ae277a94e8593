"""Hot assembly kernels.

Everything in this module is written as loop-based numpy code compiled
with numba (see stflow._accel; set STFLOW_DISABLE_NUMBA=1 for the pure
numpy/Python path).  The kernels evaluate, per quadrature point, the
quasi-linear system matrices, the SUPG stabilization matrix tau, and
accumulate element residual vectors; element tangents are formed by
forward differences of the element residual, which keeps the assembled
Jacobian consistent with the assembled residual to rounding level.

Unknown ordering: node-major, (p, u_1..u_nsd, T) per node.
Viscosity models: 0 constant (params[0] = mu), 1 Sutherland
(mu_ref, T_ref, C), 2 modified flat-plate law.
"""

import numpy as np

from ._accel import jit

FD_EPS = 1.49e-8  # sqrt(machine epsilon)
CLIP_FLOOR = 1e-10


@jit
def _viscosity(T, model, params):
    if model == 0:
        return params[0]
    if model == 1:
        mu_ref, T_ref, C = params[0], params[1], params[2]
        return mu_ref * (T_ref + C) / (T + C) * (T / T_ref) ** 1.5
    return 0.0906 * T**1.5 / (T + 0.0001406)


@jit
def _point_matrices(Yq, dY, R, gamma, Pr, visc_model, visc_params,
                    A0, A_adv, A_sp, K):
    """Fill A0, advective (advnp, no pressure), stress-power, and diffusion
    matrices at one point.  Returns (mu, kappa)."""
    m = Yq.shape[0]
    nsd = m - 2
    p = Yq[0]
    T = Yq[m - 1]
    rho = p / (R * T)
    e = R * T / (gamma - 1.0)
    mu = _viscosity(T, visc_model, visc_params)
    kappa = mu * gamma * R / ((gamma - 1.0) * Pr)

    A0[:, :] = 0.0
    A0[0, 0] = 1.0 / (R * T)
    A0[0, m - 1] = -rho / T
    for j in range(nsd):
        uj = Yq[1 + j]
        A0[1 + j, 0] = uj / (R * T)
        A0[1 + j, 1 + j] = rho
        A0[1 + j, m - 1] = -rho * uj / T
    A0[m - 1, 0] = 1.0 / (gamma - 1.0)

    A_adv[:, :, :] = 0.0
    for i in range(nsd):
        ui = Yq[1 + i]
        A_adv[i, 0, 0] = ui / (R * T)
        A_adv[i, 0, 1 + i] = rho
        A_adv[i, 0, m - 1] = -rho * ui / T
        for j in range(nsd):
            uj = Yq[1 + j]
            A_adv[i, 1 + j, 0] = ui * uj / (R * T)
            A_adv[i, 1 + j, 1 + i] += rho * uj
            A_adv[i, 1 + j, 1 + j] += rho * ui
            A_adv[i, 1 + j, m - 1] = -rho * ui * uj / T
        A_adv[i, m - 1, 0] = ui * e / (R * T)
        A_adv[i, m - 1, 1 + i] = rho * e

    # Viscous stress from the current velocity gradient.
    divu = 0.0
    for k in range(nsd):
        divu += dY[1 + k, k]
    A_sp[:, :, :] = 0.0
    for i in range(nsd):
        for j in range(nsd):
            tau_ij = mu * (dY[1 + i, j] + dY[1 + j, i])
            if i == j:
                tau_ij -= (2.0 / 3.0) * mu * divu
                A_sp[i, m - 1, 1 + j] = p - tau_ij
            else:
                A_sp[i, m - 1, 1 + j] = -tau_ij

    K[:, :, :, :] = 0.0
    for i in range(nsd):
        for j in range(nsd):
            for k in range(nsd):
                for l in range(nsd):
                    val = 0.0
                    if k == l and i == j:
                        val += mu
                    if j == k and i == l:
                        val += mu
                    if k == i and l == j:
                        val -= (2.0 / 3.0) * mu
                    K[i, j, 1 + k, 1 + l] = val
            K[i, j, m - 1, m - 1] = kappa if i == j else 0.0
    return mu, kappa


@jit
def _inv_principal_sqrt(B):
    """Principal inverse square root via eigendecomposition (small matrices)."""
    w, V = np.linalg.eig(B.astype(np.complex128))
    D = 1.0 / np.sqrt(w)
    X = V @ np.diag(D) @ np.linalg.inv(V)
    return np.ascontiguousarray(X.real)


@jit
def tau_loop(Ahat, Khat, G_all, cinv, use_k):
    """Stabilization matrix tau for a batch of metric tensors.

    Ahat holds the hatted advection matrices with the identity in the
    time slot, shape (nsd+1, m, m); Khat the hatted diffusion matrices;
    G_all the (n, nst, nst) metric tensors.  Returns (n, m, m).
    """
    n = G_all.shape[0]
    nst = Ahat.shape[0]
    nsd = nst - 1
    m = Ahat.shape[1]
    out = np.empty((n, m, m))
    for e in range(n):
        G = G_all[e]
        B = np.zeros((m, m))
        for a in range(nst):
            for b in range(nst):
                g = G[a, b]
                if g != 0.0:
                    B += g * (Ahat[a] @ Ahat[b])
        if use_k:
            for i in range(nsd):
                for j in range(nsd):
                    for k in range(nsd):
                        for l in range(nsd):
                            gg = G[i, j] * G[k, l]
                            if gg != 0.0:
                                B += (cinv * cinv) * gg * (Khat[i, k] @ Khat[l, j])
        out[e] = _inv_principal_sqrt(B)
    return out


@jit
def _element_residual(Ye, qpw, qpN, qpdNdx, qpdNdt, G, R, gamma, Pr,
                      visc_model, visc_params, cinv, source, typ, re):
    """Accumulate the Galerkin + SUPG volume residual of one element.

    Ye: (n_en, m) nodal values; qp arrays carry physical weights, basis
    values, spatial gradients, and time derivatives per quadrature
    point; G is the element space-time metric tensor.  Returns the
    number of clipped (non-physical) quadrature states.
    """
    nq = qpw.shape[0]
    n_en = Ye.shape[0]
    m = Ye.shape[1]
    nsd = m - 2
    nst = nsd + 1

    A0 = np.empty((m, m))
    A_adv = np.empty((nsd, m, m))
    A_sp = np.empty((nsd, m, m))
    K = np.empty((nsd, nsd, m, m))
    re[:, :] = 0.0
    clipped = 0
    p_floor = CLIP_FLOOR * typ[0]
    T_floor = CLIP_FLOOR * typ[m - 1]

    for q in range(nq):
        w = qpw[q]
        Yq = np.zeros(m)
        dYt = np.zeros(m)
        dY = np.zeros((m, nsd))
        for a in range(n_en):
            Na = qpN[q, a]
            dNt = qpdNdt[q, a]
            for c in range(m):
                Yq[c] += Na * Ye[a, c]
                dYt[c] += dNt * Ye[a, c]
            for i in range(nsd):
                dN = qpdNdx[q, a, i]
                for c in range(m):
                    dY[c, i] += dN * Ye[a, c]
        if Yq[0] < p_floor:
            Yq[0] = p_floor
            clipped += 1
        if Yq[m - 1] < T_floor:
            Yq[m - 1] = T_floor
            clipped += 1

        mu, kappa = _point_matrices(Yq, dY, R, gamma, Pr, visc_model,
                                    visc_params, A0, A_adv, A_sp, K)
        A0_inv = np.linalg.inv(A0)

        # Hatted matrices (conservation form), time slot is the identity.
        Ahat = np.empty((nst, m, m))
        for i in range(nsd):
            Asum = A_adv[i] + A_sp[i]
            Asum[1 + i, 0] += 1.0  # pressure flux Jacobian
            Ahat[i] = Asum @ A0_inv
        for c in range(m):
            for cc in range(m):
                Ahat[nsd, c, cc] = 1.0 if c == cc else 0.0

        B = np.zeros((m, m))
        for a in range(nst):
            for b in range(nst):
                g = G[a, b]
                if g != 0.0:
                    B += g * (Ahat[a] @ Ahat[b])
        if mu != 0.0 or kappa != 0.0:
            Khat = np.empty((nsd, nsd, m, m))
            for i in range(nsd):
                for j in range(nsd):
                    Khat[i, j] = K[i, j] @ A0_inv
            for i in range(nsd):
                for j in range(nsd):
                    for k in range(nsd):
                        for l in range(nsd):
                            gg = G[i, j] * G[k, l]
                            if gg != 0.0:
                                B += (cinv * cinv) * gg * (Khat[i, k] @ Khat[l, j])
        tau = _inv_principal_sqrt(B)

        # Strong residual and Galerkin advective part.
        res = A0 @ dYt - source
        gal = A0 @ dYt - source
        for i in range(nsd):
            ai = A_adv[i] + A_sp[i]
            v = ai @ np.ascontiguousarray(dY[:, i])
            for c in range(m):
                res[c] += v[c]
                gal[c] += v[c]
            res[1 + i] += dY[0, i]  # pressure flux part of the strong residual

        # SUPG weight: (Ahat_m^T W_,m) . (tau Res) = W_,m^T (Ahat_m tau Res)
        tres = tau @ res
        tmp = np.empty((nsd, m))
        for i in range(nsd):
            v = Ahat[i] @ tres
            for c in range(m):
                tmp[i, c] = v[c]

        # Diffusive flux and (integrated-by-parts) pressure flux.
        KdY = np.zeros((nsd, m))
        if mu != 0.0 or kappa != 0.0:
            for i in range(nsd):
                for j in range(nsd):
                    v = K[i, j] @ np.ascontiguousarray(dY[:, j])
                    for c in range(m):
                        KdY[i, c] += v[c]
        for a in range(n_en):
            Na = qpN[q, a]
            dNt = qpdNdt[q, a]
            for c in range(m):
                val = Na * gal[c] + dNt * tres[c]
                for i in range(nsd):
                    dN = qpdNdx[q, a, i]
                    val += dN * (KdY[i, c] + tmp[i, c])
                re[a, c] += w * val
            # subtract grad(W) . F_p  (momentum row i gets p * dN_i)
            for i in range(nsd):
                re[a, 1 + i] -= w * qpdNdx[q, a, i] * Yq[0]
    return clipped


@jit
def element_loop(Y, elems, qpw, qpN, qpdNdx, qpdNdt, G_all, R, gamma, Pr,
                 visc_model, visc_params, cinv, source, typ, want_tangent):
    """Residuals and forward-difference tangents for all volume elements.

    Returns (res (n_el, n_dof), tan (n_el, n_dof, n_dof), clipped).
    """
    n_el, n_en = elems.shape
    m = Y.shape[1]
    n_dof = n_en * m
    res = np.zeros((n_el, n_dof))
    tan = np.zeros((n_el if want_tangent else 0, n_dof, n_dof))
    re = np.empty((n_en, m))
    rp = np.empty((n_en, m))
    clipped = 0
    for e in range(n_el):
        Ye = np.empty((n_en, m))
        for a in range(n_en):
            node = elems[e, a]
            for c in range(m):
                Ye[a, c] = Y[node, c]
        clipped += _element_residual(
            Ye, qpw[e], qpN[e], qpdNdx[e], qpdNdt[e], G_all[e],
            R, gamma, Pr, visc_model, visc_params, cinv, source, typ, re)
        for a in range(n_en):
            for c in range(m):
                res[e, a * m + c] = re[a, c]
        if want_tangent:
            for b in range(n_dof):
                ab = b // m
                cb = b % m
                h = FD_EPS * (abs(Ye[ab, cb]) + typ[cb])
                keep = Ye[ab, cb]
                Ye[ab, cb] = keep + h
                _element_residual(
                    Ye, qpw[e], qpN[e], qpdNdx[e], qpdNdt[e], G_all[e],
                    R, gamma, Pr, visc_model, visc_params, cinv, source, typ, rp)
                Ye[ab, cb] = keep
                for a in range(n_en):
                    for c in range(m):
                        tan[e, a * m + c, b] = (rp[a, c] - re[a, c]) / h
    return res, tan, clipped


@jit
def _jump_residual(Ye, qpw, qpN, Ym, R, gamma, Pr, typ, re):
    nq = qpw.shape[0]
    n_en = Ye.shape[0]
    m = Ye.shape[1]
    nsd = m - 2
    A0 = np.empty((m, m))
    A_adv = np.empty((nsd, m, m))
    A_sp = np.empty((nsd, m, m))
    K = np.empty((nsd, nsd, m, m))
    dY = np.zeros((m, nsd))
    visc_params = np.zeros(3)
    re[:, :] = 0.0
    clipped = 0
    p_floor = CLIP_FLOOR * typ[0]
    T_floor = CLIP_FLOOR * typ[m - 1]
    for q in range(nq):
        w = qpw[q]
        Yq = np.zeros(m)
        for a in range(n_en):
            Na = qpN[q, a]
            for c in range(m):
                Yq[c] += Na * Ye[a, c]
        if Yq[0] < p_floor:
            Yq[0] = p_floor
            clipped += 1
        if Yq[m - 1] < T_floor:
            Yq[m - 1] = T_floor
            clipped += 1
        _point_matrices(Yq, dY, R, gamma, Pr, 0, visc_params, A0, A_adv, A_sp, K)
        jump = A0 @ (Yq - Ym[q])
        for a in range(n_en):
            Na = qpN[q, a]
            for c in range(m):
                re[a, c] += w * Na * jump[c]
    return clipped


@jit
def jump_loop(Y, owner_conn, qpw, qpN, Ym, R, gamma, Pr, typ, want_tangent):
    """Slab-coupling jump integrals over the lower interface facets.

    owner_conn holds the owner element connectivity per facet; qpN are
    owner basis values at the facet quadrature points; Ym is the carried
    lower trace evaluated there.
    """
    n_f, n_en = owner_conn.shape
    m = Y.shape[1]
    n_dof = n_en * m
    res = np.zeros((n_f, n_dof))
    tan = np.zeros((n_f if want_tangent else 0, n_dof, n_dof))
    re = np.empty((n_en, m))
    rp = np.empty((n_en, m))
    clipped = 0
    for f in range(n_f):
        Ye = np.empty((n_en, m))
        for a in range(n_en):
            node = owner_conn[f, a]
            for c in range(m):
                Ye[a, c] = Y[node, c]
        clipped += _jump_residual(Ye, qpw[f], qpN[f], Ym[f], R, gamma, Pr, typ, re)
        for a in range(n_en):
            for c in range(m):
                res[f, a * m + c] = re[a, c]
        if want_tangent:
            for b in range(n_dof):
                ab = b // m
                cb = b % m
                h = FD_EPS * (abs(Ye[ab, cb]) + typ[cb])
                keep = Ye[ab, cb]
                Ye[ab, cb] = keep + h
                _jump_residual(Ye, qpw[f], qpN[f], Ym[f], R, gamma, Pr, typ, rp)
                Ye[ab, cb] = keep
                for a in range(n_en):
                    for c in range(m):
                        tan[f, a * m + c, b] = (rp[a, c] - re[a, c]) / h
    return res, tan, clipped


@jit
def lateral_loop(Ylag, owner_conn, qpw, qpN, qpdNdx, normals, viscous,
                 R, gamma, Pr, visc_model, visc_params):
    """Neumann boundary term -int W . h over lateral facets.

    Evaluated entirely with the lagged iterate Ylag, so it contributes
    to the right-hand side only.  normals carry the spatial components
    of the outward unit normal; viscous flags per facet select whether
    the stress/heat-flux parts of h are kept.
    """
    n_f, n_en = owner_conn.shape
    m = Ylag.shape[1]
    nsd = m - 2
    n_dof = n_en * m
    res = np.zeros((n_f, n_dof))
    for f in range(n_f):
        Ye = np.empty((n_en, m))
        for a in range(n_en):
            node = owner_conn[f, a]
            for c in range(m):
                Ye[a, c] = Ylag[node, c]
        nq = qpw.shape[1]
        for q in range(nq):
            w = qpw[f, q]
            Yq = np.zeros(m)
            dY = np.zeros((m, nsd))
            for a in range(n_en):
                Na = qpN[f, q, a]
                for c in range(m):
                    Yq[c] += Na * Ye[a, c]
                for i in range(nsd):
                    dN = qpdNdx[f, q, a, i]
                    for c in range(m):
                        dY[c, i] += dN * Ye[a, c]
            h = np.zeros(m)
            for k in range(nsd):
                h[1 + k] = -Yq[0] * normals[f, k]
            if viscous[f] != 0:
                T = Yq[m - 1]
                mu = _viscosity(T, visc_model, visc_params)
                kappa = mu * gamma * R / ((gamma - 1.0) * Pr)
                divu = 0.0
                for k in range(nsd):
                    divu += dY[1 + k, k]
                for k in range(nsd):
                    for i in range(nsd):
                        t_ki = mu * (dY[1 + k, i] + dY[1 + i, k])
                        if k == i:
                            t_ki -= (2.0 / 3.0) * mu * divu
                        h[1 + k] += t_ki * normals[f, i]
                for i in range(nsd):
                    h[m - 1] += kappa * dY[m - 1, i] * normals[f, i]
            for a in range(n_en):
                Na = qpN[f, q, a]
                for c in range(m):
                    res[f, a * m + c] -= w * Na * h[c]
    return res
