"""Two-patch bitangency: the 3x3 Newton solver, the solved graph field with
implicit-function derivatives, the closed-form derivative identities, the
transitional test, and the fold/cusp machinery on the solved field.

The residual is G(s,t,u,v,r) = p + r m - q - r n in the world frame. For an
ordinary (A1) contact at the second patch, (u, v, r) solve uniquely near the
base configuration and the pre-symmetry set is the graph of
g : (s,t) -> (u,v); everything downstream consumes that graph.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ContactMismatchError,
    NoConvergenceError,
    SingularJacobianError,
    StationarityFailureError,
)
from .geometry3d import ContactClass, contact_type, principal_data, ridge_osculating_normal

NEWTON_TOL = 1e-11
RADIUS_GUARD = 10.0


def _patch_eval(embedded, x, y, order):
    """World point and normal jets at (x, y), truncated to the given order."""
    return embedded.point_jets(x, y, order), embedded.normal_jets(x, y, order)


def residual_G(scene, s, t, u, v, r):
    """Eq.-of-bitangency vector p + r m - q - r n (world frame)."""
    p = scene.patch_m.point(s, t)
    m = scene.patch_m.normal(s, t)
    q = scene.patch_n.point(u, v)
    n = scene.patch_n.normal(u, v)
    return p + r * m - q - r * n


def jacobian_columns(scene, sample=None):
    """The five closed-form Jacobian columns of the bitangency residual.

    At the base configuration these are exactly
    (1-r k1) e1, (1-r k2) e2, -(1-r l1) f1, -(1-r l2) f2, m - n,
    built from principal data at the two contact points. sample defaults to
    the base configuration (0, 0, 0, 0, r0).
    """
    if sample is None:
        sample = (0.0, 0.0, 0.0, 0.0, scene.sphere.radius)
    s, t, u, v, r = sample
    pd_m = principal_data(scene.patch_m, s, t)
    pd_n = principal_data(scene.patch_n, u, v)
    return [
        (1.0 - r * pd_m.kappa1) * pd_m.e1,
        (1.0 - r * pd_m.kappa2) * pd_m.e2,
        -(1.0 - r * pd_n.kappa1) * pd_n.e1,
        -(1.0 - r * pd_n.kappa2) * pd_n.e2,
        pd_m.normal - pd_n.normal,
    ]


def residual_jacobian_fd(scene, sample, h=1e-5):
    """Central finite differences of the residual in all five variables."""
    cols = []
    for k in range(5):
        dp = np.zeros(5)
        dp[k] = h
        gp = residual_G(scene, *(np.asarray(sample) + dp))
        gm = residual_G(scene, *(np.asarray(sample) - dp))
        cols.append((gp - gm) / (2 * h))
    return cols


def _solve_jacobian(scene, s, t, u, v, r):
    """Exact d G / d (u, v, r) in closed form."""
    _, n_q, q_u, q_v, n_u, n_v = scene.patch_n.frame_first(u, v)
    m = scene.patch_m.normal(s, t)
    J = np.empty((3, 3))
    J[:, 0] = -(q_u + r * n_u)
    J[:, 1] = -(q_v + r * n_v)
    J[:, 2] = m - n_q
    return J


def solve_second_contact(scene, s, t, seed=None, tol=NEWTON_TOL, max_iter=50):
    """Newton in (u, v, r) for the sphere tangent to M at (s, t).

    Returns (u, v, r). Raises SingularJacobian when the 3x3 system
    degenerates (A1 hypothesis at the second patch violated) and
    NoConvergence on iteration/box failure.
    """
    r0 = scene.sphere.radius
    box = scene.patch_n.patch.box
    u, v, r = seed if seed is not None else (0.0, 0.0, r0)
    G = residual_G(scene, s, t, u, v, r)
    best = np.linalg.norm(G)
    for _ in range(max_iter):
        if best < tol:
            break
        J = _solve_jacobian(scene, s, t, u, v, r)
        det = np.linalg.det(J)
        scale = np.cbrt(np.abs(np.prod(np.linalg.norm(J, axis=0))))
        if abs(det) < 1e-12 * max(scale, 1e-12) ** 3:
            raise SingularJacobianError(
                f"bitangency Jacobian degenerate at ({s:.3g},{t:.3g})"
            )
        step = np.linalg.solve(J, -G)
        lam = 1.0
        for _ in range(10):
            u2, v2, r2 = u + lam * step[0], v + lam * step[1], r + lam * step[2]
            G2 = residual_G(scene, s, t, u2, v2, r2)
            if np.linalg.norm(G2) < best:
                u, v, r, G, best = u2, v2, r2, G2, np.linalg.norm(G2)
                break
            lam *= 0.5
        else:
            break
        if abs(u) > box or abs(v) > box or not (0.0 < r < RADIUS_GUARD * r0):
            raise NoConvergenceError(
                f"iterate left the box/radius guard at ({s:.3g},{t:.3g})"
            )
    if best >= tol:
        raise NoConvergenceError(
            f"no convergence at ({s:.3g},{t:.3g}): |G| = {best:.2e}"
        )
    # polish to the attainable floor for clean downstream derivatives; a
    # singular system here still signals a violated A1 hypothesis
    try:
        for _ in range(2):
            J = _solve_jacobian(scene, s, t, u, v, r)
            G = residual_G(scene, s, t, u, v, r)
            du = np.linalg.solve(J, -G)
            u, v, r = u + du[0], v + du[1], r + du[2]
    except np.linalg.LinAlgError:
        raise SingularJacobianError(
            f"bitangency Jacobian degenerate at ({s:.3g},{t:.3g})"
        )
    return u, v, r


# -- implicit derivatives of the solved graph --------------------------------


def _patch_partials(embedded, x, y, order):
    """Point and normal partial-derivative vectors up to the given order."""
    pj, nj = _patch_eval(embedded, x, y, order)
    keys = [
        (i, j) for i in range(order + 1) for j in range(order + 1 - i)
    ]

    def pack(js):
        return {key: np.array([j.partial(*key) for j in js]) for key in keys}

    return pack(pj), pack(nj)


def implicit_derivatives(scene, s, t, u, v, r, order=2):
    """Partials of (u, v, r) as functions of (s, t), to second or third order.

    Differentiates the Newton fixed point: with W = (u, v, r), A = G_W, and
    G(s, t, W(s, t)) = 0,
        W_a   = -A^-1 G_a
        W_ab  = -A^-1 (G_ab + G_aW W_b + G_bW W_a + G_WW[W_a, W_b])
        W_abc = -A^-1 (G_abc + sum G_abW W_c + G_WWW[W_a, W_b, W_c]
                       + sum G_aW W_bc + sum G_WW[W_a, W_bc])
    G is linear in r and independent of (u, v) in its (s, t)-slots, so the
    mixed tensors collapse: G_aW X = X_r m_a and G_aWW = 0. All partials of
    G are exact jet evaluations of the two polynomial patches.
    """
    P, M = _patch_partials(scene.patch_m, s, t, order + 1)
    Q, N = _patch_partials(scene.patch_n, u, v, order + 1)

    A = np.zeros((3, 3))
    A[:, 0] = -(Q[(1, 0)] + r * N[(1, 0)])
    A[:, 1] = -(Q[(0, 1)] + r * N[(0, 1)])
    A[:, 2] = M[(0, 0)] - N[(0, 0)]
    Ainv = np.linalg.inv(A)

    def G_st_partial(i, j):
        return P[(i, j)] + r * M[(i, j)]

    W_s = -Ainv @ G_st_partial(1, 0)
    W_t = -Ainv @ G_st_partial(0, 1)

    def GW_bilinear(Wa, Wb):
        """G_WW[Wa, Wb]: second derivatives in (u, v, r)."""
        quu = -(Q[(2, 0)] + r * N[(2, 0)])
        quv = -(Q[(1, 1)] + r * N[(1, 1)])
        qvv = -(Q[(0, 2)] + r * N[(0, 2)])
        qur = -N[(1, 0)]
        qvr = -N[(0, 1)]
        return (
            quu * Wa[0] * Wb[0]
            + quv * (Wa[0] * Wb[1] + Wa[1] * Wb[0])
            + qvv * Wa[1] * Wb[1]
            + qur * (Wa[0] * Wb[2] + Wa[2] * Wb[0])
            + qvr * (Wa[1] * Wb[2] + Wa[2] * Wb[1])
        )

    first = {"s": W_s, "t": W_t}
    key_of = {"s": (1, 0), "t": (0, 1)}

    def second_rhs(a, b):
        Ka = key_of[a]
        Kb = key_of[b]
        Kab = (Ka[0] + Kb[0], Ka[1] + Kb[1])
        return (
            G_st_partial(*Kab)
            + first[b][2] * M[Ka]
            + first[a][2] * M[Kb]
            + GW_bilinear(first[a], first[b])
        )

    second = {}
    for a, b in (("s", "s"), ("s", "t"), ("t", "t")):
        second[a + b] = -Ainv @ second_rhs(a, b)
    out = {
        "W_s": W_s, "W_t": W_t,
        "W_ss": second["ss"], "W_st": second["st"], "W_tt": second["tt"],
    }
    if order < 3:
        return out

    def GW_trilinear(X, Y, Z):
        """G_WWW[X, Y, Z]: third derivatives of -(q + r n) in (u, v, r)."""
        c30 = -(Q[(3, 0)] + r * N[(3, 0)])
        c21 = -(Q[(2, 1)] + r * N[(2, 1)])
        c12 = -(Q[(1, 2)] + r * N[(1, 2)])
        c03 = -(Q[(0, 3)] + r * N[(0, 3)])
        nuu, nuv, nvv = -N[(2, 0)], -N[(1, 1)], -N[(0, 2)]
        xu, xv, xr = X
        yu, yv, yr = Y
        zu, zv, zr = Z
        return (
            c30 * xu * yu * zu
            + c21 * (xu * yu * zv + xu * yv * zu + xv * yu * zu)
            + c12 * (xu * yv * zv + xv * yu * zv + xv * yv * zu)
            + c03 * xv * yv * zv
            + nuu * (xr * yu * zu + xu * yr * zu + xu * yu * zr)
            + nuv * (
                xr * (yu * zv + yv * zu)
                + yr * (xu * zv + xv * zu)
                + zr * (xu * yv + xv * yu)
            )
            + nvv * (xr * yv * zv + xv * yr * zv + xv * yv * zr)
        )

    third = {}
    for combo in ("sss", "sst", "stt", "ttt"):
        a, b, c = combo
        Ka, Kb, Kc = key_of[a], key_of[b], key_of[c]
        Kabc = (Ka[0] + Kb[0] + Kc[0], Ka[1] + Kb[1] + Kc[1])
        Kab = (Ka[0] + Kb[0], Ka[1] + Kb[1])
        Kac = (Ka[0] + Kc[0], Ka[1] + Kc[1])
        Kbc = (Kb[0] + Kc[0], Kb[1] + Kc[1])
        Wa, Wb, Wc = first[a], first[b], first[c]
        Wab = second["".join(sorted(a + b))]
        Wac = second["".join(sorted(a + c))]
        Wbc = second["".join(sorted(b + c))]
        rhs = (
            G_st_partial(*Kabc)
            + Wc[2] * M[Kab] + Wb[2] * M[Kac] + Wa[2] * M[Kbc]
            + GW_trilinear(Wa, Wb, Wc)
            + Wbc[2] * M[Ka] + Wac[2] * M[Kb] + Wab[2] * M[Kc]
            + GW_bilinear(Wa, Wbc) + GW_bilinear(Wb, Wac) + GW_bilinear(Wc, Wab)
        )
        third[combo] = -Ainv @ rhs
    out.update(
        W_sss=third["sss"], W_sst=third["sst"], W_stt=third["stt"], W_ttt=third["ttt"]
    )
    return out


@dataclass
class GraphField:
    """Solved (u, v, r) over a rectangular (s, t) grid with node partials."""

    s_axis: np.ndarray
    t_axis: np.ndarray
    U: np.ndarray
    V: np.ndarray
    R: np.ndarray
    first: dict  # 'u_s', 'u_t', 'v_s', 'v_t', 'r_s', 'r_t' -> 2D arrays
    second: dict  # 'u_ss', ..., 'r_tt' -> 2D arrays
    ok: np.ndarray
    residual: np.ndarray
    scene: object = None
    base_third: dict = None  # exact third partials at the base node only

    @property
    def base_index(self):
        return len(self.s_axis) // 2, len(self.t_axis) // 2

    def det_j(self):
        return (
            self.first["u_s"] * self.first["v_t"]
            - self.first["u_t"] * self.first["v_s"]
        )


def solve_field(scene, n=10, half_width=0.12, tol=NEWTON_TOL, with_second=True):
    """Continuation over a (2n+1)^2 grid, spiralling outward from the base.

    Each node seeds from its nearest already-solved neighbour toward the
    centre, with up to 16 intermediate continuation substeps on failure.
    """
    axis = np.linspace(-half_width, half_width, 2 * n + 1)
    size = 2 * n + 1
    U = np.full((size, size), np.nan)
    V = np.full((size, size), np.nan)
    R = np.full((size, size), np.nan)
    ok = np.zeros((size, size), dtype=bool)
    res = np.full((size, size), np.nan)
    first = {k: np.full((size, size), np.nan) for k in ("u_s", "u_t", "v_s", "v_t", "r_s", "r_t")}
    second = {
        k: np.full((size, size), np.nan)
        for k in ("u_ss", "u_st", "u_tt", "v_ss", "v_st", "v_tt", "r_ss", "r_st", "r_tt")
    }

    order = sorted(
        ((i, j) for i in range(size) for j in range(size)),
        key=lambda ij: (max(abs(ij[0] - n), abs(ij[1] - n)), ij),
    )
    for i, j in order:
        s, t = axis[i], axis[j]
        if i == n and j == n:
            seed = (0.0, 0.0, scene.sphere.radius)
            s_from, t_from = 0.0, 0.0
        else:
            neighbours = [
                (abs(i2 - n) + abs(j2 - n), i2, j2)
                for i2 in range(max(0, i - 1), min(size, i + 2))
                for j2 in range(max(0, j - 1), min(size, j + 2))
                if ok[i2, j2]
            ]
            if not neighbours:
                continue
            _, i2, j2 = min(neighbours)
            seed = (U[i2, j2], V[i2, j2], R[i2, j2])
            s_from, t_from = axis[i2], axis[j2]
        try:
            u, v, r = _continuation_solve(scene, s_from, t_from, s, t, seed, tol)
        except (NoConvergenceError, SingularJacobianError):
            continue
        U[i, j], V[i, j], R[i, j] = u, v, r
        ok[i, j] = True
        res[i, j] = np.linalg.norm(residual_G(scene, s, t, u, v, r))
        d = implicit_derivatives(scene, s, t, u, v, r)
        for k, key in enumerate(("u", "v", "r")):
            first[f"{key}_s"][i, j] = d["W_s"][k]
            first[f"{key}_t"][i, j] = d["W_t"][k]
            if with_second:
                second[f"{key}_ss"][i, j] = d["W_ss"][k]
                second[f"{key}_st"][i, j] = d["W_st"][k]
                second[f"{key}_tt"][i, j] = d["W_tt"][k]
    if not ok[n, n]:
        raise NoConvergenceError("base configuration did not solve")
    base_third = implicit_derivatives(
        scene, 0.0, 0.0, U[n, n], V[n, n], R[n, n], order=3
    )
    return GraphField(axis, axis, U, V, R, first, second, ok, res, scene, base_third)


def _continuation_solve(scene, s0, t0, s1, t1, seed, tol):
    """Solve at (s1, t1) from a seed at (s0, t0), halving steps on failure."""
    for substeps in (1, 2, 4, 8, 16):
        u, v, r = seed
        try:
            for k in range(1, substeps + 1):
                f = k / substeps
                s = s0 + f * (s1 - s0)
                t = t0 + f * (t1 - t0)
                u, v, r = solve_second_contact(scene, s, t, (u, v, r), tol)
            return u, v, r
        except NoConvergenceError:
            continue
    raise NoConvergenceError(f"continuation failed toward ({s1:.3g},{t1:.3g})")


# -- closed-form identity checks ---------------------------------------------


def derivative_identities_check(scene):
    """Verify the base-point identities of the solved graph.

    A2 at the first patch: r_s = u_s = v_s = 0 and
    r_t = -e2.n (1 - r kappa2) / (m.n - 1). A3 additionally zeroes the
    second s-derivatives taken along the arclength curvature-line
    parametrization; the chart correction at the base is
    W_ss|principal = W_ss + kg * W_t with kg = 2 b1 / (kappa1 - kappa2),
    the geodesic curvature of the kappa1 curvature line (the first
    s-derivatives all vanish, so no other chart term survives).
    Raises ContactMismatch when the scene's contacts do not apply.
    """
    rep_m = contact_type(scene.patch_m, scene.sphere)
    rep_n = contact_type(scene.patch_n, scene.sphere)
    if rep_n.klass is not ContactClass.A1 or rep_m.klass not in (
        ContactClass.A2,
        ContactClass.A3,
    ):
        raise ContactMismatchError(
            f"identities need A2A1 or A3A1, got {rep_m.klass.value}{rep_n.klass.value}"
        )
    r0 = scene.sphere.radius
    d = implicit_derivatives(scene, 0.0, 0.0, 0.0, 0.0, r0)
    pd_m = principal_data(scene.patch_m, 0.0, 0.0)
    pd_n = principal_data(scene.patch_n, 0.0, 0.0)
    m, nrm = pd_m.normal, pd_n.normal
    rt_closed = -(pd_m.e2 @ nrm) * (1.0 - r0 * pd_m.kappa2) / (m @ nrm - 1.0)
    report = {
        "contact": rep_m.klass.value + rep_n.klass.value,
        "u_s": d["W_s"][0],
        "v_s": d["W_s"][1],
        "r_s": d["W_s"][2],
        "r_t": d["W_t"][2],
        "r_t_closed_form": rt_closed,
        "r_t_defect": abs(d["W_t"][2] - rt_closed),
    }
    if rep_m.klass is ContactClass.A3:
        p = scene.patch_m.patch
        kg = 2.0 * p.cubic[1] / (p.kappa1 - p.kappa2)
        report.update(
            u_ss=d["W_ss"][0] + kg * d["W_t"][0],
            v_ss=d["W_ss"][1] + kg * d["W_t"][1],
            r_ss=d["W_ss"][2] + kg * d["W_t"][2],
            u_ss_monge=d["W_ss"][0],
            r_ss_monge=d["W_ss"][2],
        )
    return report


def transitional_a3a1_test(scene, tol=1e-6):
    """Generic versus transitional A3A1, with the geometric cross-check.

    Delta = e2.n (1 - r kappa2) kappa1^2 - kappa1_t (m.n - 1); zero exactly
    when the osculating plane of the kappa1 curvature line at the first
    contact passes through the second contact point.
    """
    rep_m = contact_type(scene.patch_m, scene.sphere)
    rep_n = contact_type(scene.patch_n, scene.sphere)
    if rep_m.klass is not ContactClass.A3 or rep_n.klass is not ContactClass.A1:
        raise ContactMismatchError(
            f"transitional test needs A3A1, got {rep_m.klass.value}{rep_n.klass.value}"
        )
    r0 = scene.sphere.radius
    pd_m = principal_data(scene.patch_m, 0.0, 0.0)
    nrm = principal_data(scene.patch_n, 0.0, 0.0).normal
    m = pd_m.normal
    delta = (pd_m.e2 @ nrm) * (1.0 - r0 * pd_m.kappa2) * pd_m.kappa1**2 - (
        pd_m.kappa1_t * (m @ nrm - 1.0)
    )
    # geometric route: distance from q0 to the osculating plane at p0
    plane_n_local = ridge_osculating_normal(scene.patch_m.patch)
    plane_n = scene.patch_m.motion.apply_vector(plane_n_local)
    p0 = scene.patch_m.point(0.0, 0.0)
    q0 = scene.patch_n.point(0.0, 0.0)
    plane_dist = abs((q0 - p0) @ plane_n)
    report = {
        "delta": delta,
        "plane_distance": plane_dist,
        "transitional": abs(delta) <= tol,
    }
    if (abs(delta) <= tol) != (plane_dist <= tol * 10 * max(1.0, pd_m.kappa1)):
        report["cross_check_warning"] = True
    return report


def radius_curvature_product(scene, field):
    """R(s, t) = r(s, t) * kappa1(s, t) sampled over the solved grid."""
    Rk = np.full_like(field.R, np.nan)
    for i, s in enumerate(field.s_axis):
        for j, t in enumerate(field.t_axis):
            if field.ok[i, j]:
                k1 = principal_data(scene.patch_m, s, t).kappa1
                Rk[i, j] = field.R[i, j] * k1
    return Rk


def lips_beaks_discriminant(scene, field=None, tol_stationary=1e-6, tol_det=1e-8):
    """Sign of det Hess of r*kappa1 at the base: positive lips, negative beaks.

    Verifies the transitional stationarity R_s = R_t = 0 first; the Hessian
    comes from central differences of the solved field.
    """
    trans = transitional_a3a1_test(scene)
    if not trans["transitional"]:
        raise StationarityFailureError(
            f"scene is not transitional: delta = {trans['delta']:.3e}"
        )
    if field is None:
        field = solve_field(scene, n=6, half_width=0.06)
    i0, j0 = field.base_index
    hs = field.s_axis[1] - field.s_axis[0]
    Rk = radius_curvature_product(scene, field)
    # stationarity from the exact implicit/curvature derivatives (grid
    # differences would bury 1e-6 under O(h^2) truncation)
    from .geometry3d import _curvature_field_jets

    r0 = scene.sphere.radius
    d = implicit_derivatives(scene, 0.0, 0.0, 0.0, 0.0, r0)
    k1j, _, _ = _curvature_field_jets(scene.patch_m.patch, 0.0, 0.0, 1)
    k1 = k1j.value()
    R_s = d["W_s"][2] * k1 + r0 * k1j.partial(1, 0)
    R_t = d["W_t"][2] * k1 + r0 * k1j.partial(0, 1)
    if abs(R_s) > tol_stationary or abs(R_t) > tol_stationary:
        raise StationarityFailureError(
            f"R not critical at base: R_s={R_s:.3e}, R_t={R_t:.3e}"
        )
    R_ss = (Rk[i0 + 1, j0] - 2 * Rk[i0, j0] + Rk[i0 - 1, j0]) / hs**2
    R_tt = (Rk[i0, j0 + 1] - 2 * Rk[i0, j0] + Rk[i0, j0 - 1]) / hs**2
    R_st = (
        Rk[i0 + 1, j0 + 1] - Rk[i0 + 1, j0 - 1] - Rk[i0 - 1, j0 + 1] + Rk[i0 - 1, j0 - 1]
    ) / (4 * hs**2)
    det = R_ss * R_tt - R_st**2
    if abs(det) < tol_det:
        side = "Degenerate"
    elif det > 0:
        side = "LipsSide"
    else:
        side = "BeaksSide"
    return {
        "side": side, "det_hess": det, "R_s": R_s, "R_t": R_t,
        "hessian": (R_ss, R_st, R_tt),
    }


# -- critical set, cusp points, fold preimages -------------------------------


def trace_critical_set(field):
    """Polylines of {det J = 0} on the solved grid (marching squares)."""
    D = field.det_j()
    okmask = field.ok
    segs = []
    n_s, n_t = D.shape
    sax, tax = field.s_axis, field.t_axis
    for i in range(n_s - 1):
        for j in range(n_t - 1):
            if not (okmask[i, j] and okmask[i + 1, j] and okmask[i, j + 1] and okmask[i + 1, j + 1]):
                continue
            c = [D[i, j], D[i + 1, j], D[i + 1, j + 1], D[i, j + 1]]
            pts = []
            edges = [
                ((sax[i], tax[j]), (sax[i + 1], tax[j]), c[0], c[1]),
                ((sax[i + 1], tax[j]), (sax[i + 1], tax[j + 1]), c[1], c[2]),
                ((sax[i + 1], tax[j + 1]), (sax[i], tax[j + 1]), c[2], c[3]),
                ((sax[i], tax[j + 1]), (sax[i], tax[j]), c[3], c[0]),
            ]
            for (p1, p2, a, b) in edges:
                if (a < 0) != (b < 0) and a != b:
                    f = a / (a - b)
                    pts.append(
                        (p1[0] + f * (p2[0] - p1[0]), p1[1] + f * (p2[1] - p1[1]))
                    )
            if len(pts) >= 2:
                segs.append((pts[0], pts[1]))
    return _chain_segments(segs)


def _chain_segments(segs, tol=1e-9):
    """Greedy chaining of 2-point segments into polylines."""
    if not segs:
        return []
    remaining = [list(map(np.asarray, seg)) for seg in segs]
    chains = []
    while remaining:
        chain = list(remaining.pop())
        grown = True
        while grown:
            grown = False
            for k, (a, b) in enumerate(remaining):
                if np.linalg.norm(chain[-1] - a) < tol:
                    chain.append(b)
                elif np.linalg.norm(chain[-1] - b) < tol:
                    chain.append(a)
                elif np.linalg.norm(chain[0] - a) < tol:
                    chain.insert(0, b)
                elif np.linalg.norm(chain[0] - b) < tol:
                    chain.insert(0, a)
                else:
                    continue
                remaining.pop(k)
                grown = True
                break
        chains.append(np.array(chain))
    return chains


def _field_interp(field, s, t, key):
    """Bilinear interpolation of a first-derivative grid."""
    arr = field.first[key]
    sax, tax = field.s_axis, field.t_axis
    i = np.clip(np.searchsorted(sax, s) - 1, 0, len(sax) - 2)
    j = np.clip(np.searchsorted(tax, t) - 1, 0, len(tax) - 2)
    fs = (s - sax[i]) / (sax[i + 1] - sax[i])
    ft = (t - tax[j]) / (tax[j + 1] - tax[j])
    return (
        arr[i, j] * (1 - fs) * (1 - ft)
        + arr[i + 1, j] * fs * (1 - ft)
        + arr[i, j + 1] * (1 - fs) * ft
        + arr[i + 1, j + 1] * fs * ft
    )


def cusp_points(field):
    """Cusp points of the graph map: kernel of dg tangent to the fold curve.

    Walks each traced critical-set polyline and reports sign changes of
    cross(kernel direction, curve tangent).
    """
    chains = trace_critical_set(field)
    found = []
    for chain in chains:
        if len(chain) < 3:
            continue
        align = []
        for k in range(len(chain)):
            s, t = chain[k]
            J = np.array(
                [
                    [_field_interp(field, s, t, "u_s"), _field_interp(field, s, t, "u_t")],
                    [_field_interp(field, s, t, "v_s"), _field_interp(field, s, t, "v_t")],
                ]
            )
            # right null vector of the (nearly) rank-1 Jacobian
            _, _, vt = np.linalg.svd(J)
            ker = vt[-1]
            if k == 0:
                tangent = chain[1] - chain[0]
            elif k == len(chain) - 1:
                tangent = chain[-1] - chain[-2]
            else:
                tangent = chain[k + 1] - chain[k - 1]
            nt = np.linalg.norm(tangent)
            if nt == 0:
                align.append(0.0)
                continue
            tangent = tangent / nt
            align.append(ker[0] * tangent[1] - ker[1] * tangent[0])
        align = np.array(align)
        # kernel orientation is arbitrary per node: fix signs by continuity
        # of the kernel direction along the chain
        kers = []
        for k in range(len(chain)):
            s, t = chain[k]
            J = np.array(
                [
                    [_field_interp(field, s, t, "u_s"), _field_interp(field, s, t, "u_t")],
                    [_field_interp(field, s, t, "v_s"), _field_interp(field, s, t, "v_t")],
                ]
            )
            _, _, vt = np.linalg.svd(J)
            kers.append(vt[-1])
        for k in range(1, len(kers)):
            if kers[k] @ kers[k - 1] < 0:
                kers[k] = -kers[k]
                align[k] = -align[k]
        for k in range(1, len(align)):
            if align[k - 1] == 0.0:
                continue
            if align[k] * align[k - 1] < 0:
                f = align[k - 1] / (align[k - 1] - align[k])
                pt = chain[k - 1] + f * (chain[k] - chain[k - 1])
                found.append(tuple(pt))
    return found


def count_preimages(scene, target_uv, field, r_hint=None, dedupe=1e-6):
    """Bitangent spheres tangent to the second patch at a fixed (u, v).

    Multi-start Newton on G(s, t, u*, v*, r) = 0 in (s, t, r), seeded from
    every solved grid node whose image lies near the target. Returns the
    deduplicated list of (s, t, r) solutions inside the box.
    """
    u_star, v_star = target_uv
    box = scene.patch_m.patch.box
    r0 = scene.sphere.radius
    dist = np.hypot(field.U - u_star, field.V - v_star)
    dist[~field.ok] = np.inf
    order = np.dstack(np.unravel_index(np.argsort(dist, axis=None), dist.shape))[0]
    seeds = order[: min(24, len(order))]
    sols = []
    for i, j in seeds:
        if not np.isfinite(dist[i, j]):
            continue
        s, t = field.s_axis[i], field.t_axis[j]
        r = field.R[i, j] if r_hint is None else r_hint
        try:
            s, t, r = _preimage_newton(scene, u_star, v_star, s, t, r)
        except (NoConvergenceError, SingularJacobianError):
            continue
        if abs(s) > box or abs(t) > box or not (0 < r < RADIUS_GUARD * r0):
            continue
        if all(np.hypot(s - a, t - b) > dedupe for a, b, _ in sols):
            sols.append((s, t, r))
    return sols


def _preimage_newton(scene, u, v, s, t, r, tol=NEWTON_TOL, max_iter=40):
    best = np.linalg.norm(residual_G(scene, s, t, u, v, r))
    for _ in range(max_iter):
        if best < tol:
            return s, t, r
        _, m, p_s, p_t, m_s, m_t = scene.patch_m.frame_first(s, t)
        nn = scene.patch_n.normal(u, v)
        J = np.empty((3, 3))
        J[:, 0] = p_s + r * m_s
        J[:, 1] = p_t + r * m_t
        J[:, 2] = m - nn
        G = residual_G(scene, s, t, u, v, r)
        if abs(np.linalg.det(J)) < 1e-14:
            raise SingularJacobianError("preimage Jacobian degenerate")
        step = np.linalg.solve(J, -G)
        lam = 1.0
        for _ in range(8):
            s2, t2, r2 = s + lam * step[0], t + lam * step[1], r + lam * step[2]
            n2 = np.linalg.norm(residual_G(scene, s2, t2, u, v, r2))
            if n2 < best:
                s, t, r, best = s2, t2, r2, n2
                break
            lam *= 0.5
        else:
            raise NoConvergenceError("preimage Newton stalled")
    raise NoConvergenceError(f"preimage Newton |G| = {best:.2e}")


def fold_targets(field, count=100, offset=None):
    """Target points straddling the image of the fold curve.

    Returns (two_side, zero_side) lists of (u, v) targets generated along
    g(critical set), offset along the image normal. The covered side is
    decided per point by solving g exactly a couple of grid steps along the
    fold kernel: at a fold, that displacement is quadratic and lands on the
    two-preimage side (grid interpolation is far too coarse for this).
    """
    scene = field.scene
    chains = trace_critical_set(field)
    if not chains:
        raise StationarityFailureError("no critical set in the field")
    chain = max(chains, key=len)

    def g_exact(s, t):
        u, v, _ = solve_second_contact(scene, s, t)
        return np.array([u, v])

    # resample the polyline by arclength so any target count is reachable
    seg = np.linalg.norm(np.diff(chain, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    want = np.linspace(0.02 * arc[-1], 0.98 * arc[-1], count + 2)
    pts = np.column_stack(
        [np.interp(want, arc, chain[:, 0]), np.interp(want, arc, chain[:, 1])]
    )

    two_side, zero_side = [], []
    eps = 2.0 * (field.s_axis[1] - field.s_axis[0])
    box = scene.patch_m.patch.box
    for k in range(1, len(pts) - 1):
        s, t = pts[k]
        try:
            img = g_exact(s, t)
            a = g_exact(*pts[k - 1])
            b = g_exact(*pts[k + 1])
        except (NoConvergenceError, SingularJacobianError):
            continue
        tang = b - a
        nt = np.linalg.norm(tang)
        if nt < 1e-12:
            continue
        tang /= nt
        nrm = np.array([-tang[1], tang[0]])
        J = np.array(
            [
                [_field_interp(field, s, t, "u_s"), _field_interp(field, s, t, "u_t")],
                [_field_interp(field, s, t, "v_s"), _field_interp(field, s, t, "v_t")],
            ]
        )
        _, _, vt = np.linalg.svd(J)
        ker = vt[-1]
        if abs(s + eps * ker[0]) > box or abs(t + eps * ker[1]) > box:
            ker = -ker
            if abs(s + eps * ker[0]) > box or abs(t + eps * ker[1]) > box:
                continue
        try:
            probe = g_exact(s + eps * ker[0], t + eps * ker[1]) - img
        except (NoConvergenceError, SingularJacobianError):
            continue
        disp = probe @ nrm
        if abs(disp) < 1e-9:
            continue  # fold displacement unresolved here; skip the point
        side = np.sign(disp)
        # targets at a fraction of the measured displacement stay inside
        # the quadratic fold regime, keeping both preimages on the grid
        off = 0.25 * abs(disp) if offset is None else offset
        two_side.append(tuple(img + side * off * nrm))
        zero_side.append(tuple(img - side * off * nrm))
    return two_side, zero_side


def _grid_interp(field, s, t, arr):
    sax, tax = field.s_axis, field.t_axis
    i = int(np.clip(np.searchsorted(sax, s) - 1, 0, len(sax) - 2))
    j = int(np.clip(np.searchsorted(tax, t) - 1, 0, len(tax) - 2))
    fs = (s - sax[i]) / (sax[i + 1] - sax[i])
    ft = (t - tax[j]) / (tax[j + 1] - tax[j])
    return (
        arr[i, j] * (1 - fs) * (1 - ft)
        + arr[i + 1, j] * fs * (1 - ft)
        + arr[i, j + 1] * (1 - fs) * ft
        + arr[i + 1, j + 1] * fs * ft
    )
