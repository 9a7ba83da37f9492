"""Single-patch bitangency in the (s, u) parametrization.

Near a ridge contact the two contact points of a bitangent sphere share one
patch; parametrizing by the first coordinates (s, u) of the two points and
solving for (t, v, r) keeps the solution a graph and pushes the spurious
diagonal component to s = u, which is simply refused. Local series of the
solved t(s, u) are fitted over a two-ring stencil and compared against the
closed-form coefficient predictions.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    ContactMismatchError,
    ExceptionalRidgeDirectionError,
    NoConvergenceError,
    SingularRidgeError,
    TrivialBranchError,
)
from .geometry3d import ContactClass, contact_type, eq9_denominator, eq9_numerator, t02_numerator

NEWTON_TOL = 1e-12
DEFAULT_STENCIL = 0.02


@dataclass(frozen=True)
class OnDiagSample:
    s: float
    u: float
    t: float
    v: float
    r: float
    residual: float


def predicted_coeffs(patch, case):
    """Closed-form series coefficients of t(s, u) for each contact case.

    A3: t = alpha (s + u) + h.o.t.
    A4: t = t20 s^2 + t11 s u + t02 u^2 + ... with t11 = (4/3) t02.
    A5: t = b1/(kappa1 - kappa2) s^2 + cubic with pattern
        (t30, t21, t21, (2/3) t21) on (s^3, s^2 u, s u^2, u^3).
    """
    k1, k2 = patch.kappa1, patch.kappa2
    b1 = patch.cubic[1]
    if case == "A3":
        den = eq9_denominator(patch)
        if abs(den) < 1e-12:
            raise ExceptionalRidgeDirectionError(
                "ridge tangent along the other principal direction"
            )
        return {"alpha": 0.25 * eq9_numerator(patch) / den}
    if case == "A4":
        den = (k1 - k2) * eq9_denominator(patch)
        if abs(den) < 1e-12:
            raise SingularRidgeError("quadratic-series denominator vanishes")
        t02 = t02_numerator(patch) / den
        return {"t20": t02 + b1 / (k1 - k2), "t11": 4.0 * t02 / 3.0, "t02": t02}
    if case == "A5":
        return {
            "s2": b1 / (k1 - k2),
            "cubic_pattern": (1.0, 1.0, 2.0 / 3.0),  # s^2 u, s u^2, u^3 vs t21
        }
    raise ValueError(f"unsupported case {case!r}")


def _seed_from_series(scene, s, u):
    patch = scene.patch_m.patch
    rep = scene.meta.get("contact_report") or contact_type(scene.patch_m, scene.sphere)
    case = rep.klass.value
    r0 = scene.sphere.radius
    if case == "A3":
        try:
            a = predicted_coeffs(patch, "A3")["alpha"]
        except ExceptionalRidgeDirectionError:
            a = 0.0
        t = v = a * (s + u)
    elif case == "A4":
        c = predicted_coeffs(patch, "A4")
        t = c["t20"] * s * s + c["t11"] * s * u + c["t02"] * u * u
        v = c["t02"] * s * s + c["t11"] * s * u + c["t20"] * u * u
    else:
        c = predicted_coeffs(patch, "A5")["s2"]
        t = c * s * s
        v = c * u * u
    return t, v, r0


def solve_ondiag(scene, s, u, seed=None, tol=NEWTON_TOL, max_iter=60):
    """Newton in (t, v, r) for a sphere tangent at (s, .) and (u, .).

    Strictly off-diagonal: s = u is the spurious diagonal component and is
    refused. Seeds come from the series predictions unless given.
    """
    if s == u:
        raise TrivialBranchError("s = u lies on the diagonal component")
    patch_box = scene.patch_m.patch.box
    r0 = scene.sphere.radius
    emb = scene.patch_m
    t, v, r = seed if seed is not None else _seed_from_series(scene, s, u)

    def G(t_, v_, r_):
        p = emb.point(s, t_)
        m = emb.normal(s, t_)
        q = emb.point(u, v_)
        n = emb.normal(u, v_)
        return p + r_ * m - q - r_ * n

    best = np.linalg.norm(G(t, v, r))
    for _ in range(max_iter):
        if best < tol:
            break
        _, m, _, p_t, _, m_t = emb.frame_first(s, t)
        _, n, _, q_v, _, n_v = emb.frame_first(u, v)
        J = np.empty((3, 3))
        J[:, 0] = p_t + r * m_t
        J[:, 1] = -(q_v + r * n_v)
        J[:, 2] = m - n
        Gv = G(t, v, r)
        # the (t, v)-columns nearly cancel along u ~ -s (even quadratic
        # part), so take Tikhonov-regularized steps instead of raw solves,
        # raising the damping when the line search keeps overshooting
        U, S, Vt = np.linalg.svd(J)
        accepted = False
        mu = 1e-10 * S[0]
        for _ in range(6):
            step = Vt.T @ ((S / (S**2 + mu**2)) * (U.T @ -Gv))
            lam = 1.0
            for _ in range(10):
                t2, v2, r2 = t + lam * step[0], v + lam * step[1], r + lam * step[2]
                norm2 = np.linalg.norm(G(t2, v2, r2))
                if norm2 < best:
                    t, v, r, best = t2, v2, r2, norm2
                    accepted = True
                    break
                lam *= 0.5
            if accepted:
                break
            mu *= 100.0
        if not accepted:
            break
        if abs(t) > patch_box or abs(v) > patch_box or not (0 < r < 10 * r0):
            raise NoConvergenceError("iterate left the box/radius guard")
    if best >= tol and best < 1e-6:
        # the damped search can oscillate at its floor; plain steps finish
        # the job when the iterate is already in the quadratic basin
        for _ in range(4):
            _, m, _, p_t, _, m_t = emb.frame_first(s, t)
            _, n, _, q_v, _, n_v = emb.frame_first(u, v)
            J = np.column_stack([p_t + r * m_t, -(q_v + r * n_v), m - n])
            try:
                step = np.linalg.solve(J, -G(t, v, r))
            except np.linalg.LinAlgError:
                break
            t2, v2, r2 = t + step[0], v + step[1], r + step[2]
            norm2 = np.linalg.norm(G(t2, v2, r2))
            if not np.isfinite(norm2) or norm2 > best:
                break
            t, v, r, best = t2, v2, r2, norm2
            if best < tol:
                break
    if best >= tol:
        raise NoConvergenceError(f"on-diagonal solve stalled at |G| = {best:.2e}")
    if np.hypot(s - u, t - v) < 1e-3 * abs(s - u):
        raise TrivialBranchError("converged onto the diagonal component")
    return OnDiagSample(s, u, t, v, r, best)


def solve_ondiag_symmetric(scene, s, u, tol_sym=1e-10, rounds=4, seed=None):
    """Solve (s, u) and (u, s) jointly on the swap-symmetric sheet.

    The system has nearby ghost solutions that break t(s,u) = v(u,s); this
    re-seeds each solve from the other's swap until the pair is mutually
    consistent, which singles out the genuine sheet.
    """
    a = solve_ondiag(scene, s, u, seed=seed)
    try:
        b = solve_ondiag(scene, u, s)
    except NoConvergenceError:
        b = solve_ondiag(scene, u, s, seed=(a.v, a.t, a.r))
    for _ in range(rounds):
        defect = max(abs(a.t - b.v), abs(a.v - b.t), abs(a.r - b.r))
        if defect <= tol_sym:
            return a, b
        ts = 0.5 * (a.t + b.v)
        vs = 0.5 * (a.v + b.t)
        rs = 0.5 * (a.r + b.r)
        a = solve_ondiag(scene, s, u, seed=(ts, vs, rs))
        b = solve_ondiag(scene, u, s, seed=(vs, ts, rs))
    defect = max(abs(a.t - b.v), abs(a.v - b.t), abs(a.r - b.r))
    if defect > tol_sym:
        raise NoConvergenceError(
            f"swap symmetrization stalled at defect {defect:.2e} for ({s:.4g},{u:.4g})"
        )
    return a, b


def stencil_nodes(h, n_angles=20, drop=0.25, radii=(1.0, 2.0**-0.5, 0.5)):
    """Rings spanning [h/2, h]; near-diagonal nodes removed on both diagonals.

    Three radii keep the radial profiles {1, rho^2, rho^4} of the even
    angular chains independent, which a two-ring stencil cannot do. Nodes
    with |s - u| < drop*h sit too close to the spurious diagonal; nodes
    with |s + u| < drop*h sit on the weak direction of the (t, v, r)
    system (the even part of the height function makes the t and v
    columns cancel there), so both bands are dropped.
    """
    nodes = []
    for f in radii:
        rho = f * h
        for k in range(n_angles):
            ang = 2.0 * np.pi * (k + 0.5) / n_angles
            s, u = rho * np.cos(ang), rho * np.sin(ang)
            if abs(s - u) >= drop * h and abs(s + u) >= drop * h:
                nodes.append((s, u))
    return nodes


@dataclass
class SeriesFit:
    t_coeffs: dict  # (i, j) -> coefficient of s^i u^j
    v_coeffs: dict
    rms_residual: float
    stencil_radius: float
    coeff_errors: dict  # (i, j) -> |ring-h fit - ring-h/2 fit|
    samples: list


def _fit_poly(nodes, values, fit_deg, scale):
    monos = [
        (i, j)
        for i in range(fit_deg + 1)
        for j in range(fit_deg + 1 - i)
    ]
    A = np.array(
        [[(s / scale) ** i * (u / scale) ** j for (i, j) in monos] for (s, u) in nodes]
    )
    sol, *_ = np.linalg.lstsq(A, np.asarray(values), rcond=None)
    resid = A @ sol - np.asarray(values)
    coeffs = {m: sol[k] / scale ** sum(m) for k, m in enumerate(monos)}
    return coeffs, float(np.sqrt(np.mean(resid**2)))


def series_fit(scene, h=DEFAULT_STENCIL, case=None):
    """Polynomial fit of the solved t(s, u) over the ring stencil.

    The fit degree is the case degree plus two, so the named coefficients
    are clean of the next truncation orders; per-coefficient errors come
    from a refit at 0.8 h. Stencil radii stay within [h/2, h]: much smaller
    radii run into the noise floor of the near-diagonal conditioning and
    into ghost bitangencies that break the swap symmetry.
    """
    if case is None:
        rep = scene.meta.get("contact_report") or contact_type(scene.patch_m, scene.sphere)
        case = rep.klass.value
    deg = {"A3": 1, "A4": 2, "A5": 3}.get(case)
    if deg is None:
        raise ContactMismatchError(f"series fit needs A3..A5, got {case}")
    # degree 5 is the largest fully identifiable degree on three rings
    # (each parity chain has at most three radial profiles) and pushes the
    # truncation alias on the named coefficients past the quintic terms
    fit_deg = 5

    def fit_at(radius):
        nodes = stencil_nodes(radius)
        solved, samples = solve_stencil(scene, nodes)
        tc, rms = _fit_poly(solved, [p.t for p in samples], fit_deg, radius)
        vc, _ = _fit_poly(solved, [p.v for p in samples], fit_deg, radius)
        return tc, vc, rms, samples

    try:
        tc_h, vc_h, rms_h, samples_h = fit_at(h)
    except NoConvergenceError:
        # the unreliable band near the diagonal has a fixed absolute size,
        # so a larger stencil regains coverage
        h = 1.4 * h
        tc_h, vc_h, rms_h, samples_h = fit_at(h)
    # error estimate from a refit at larger radius (smaller radii approach
    # the ghost-sheet zone and would corrupt the estimate, not improve it)
    tc_b, _, _, samples_b = fit_at(1.2 * h)
    errors = {m: abs(tc_b[m] - tc_h[m]) for m in tc_h}
    return SeriesFit(tc_h, vc_h, rms_h, h, errors, samples_h + samples_b)


def solve_stencil(scene, nodes, min_fraction=0.7):
    """Symmetrized solves over a node list, with neighbour-seed fallback.

    Series seeds fail where the seed sits on a singular system (e.g. the
    anti-diagonal of an A3 stencil); the previous node's solution is an
    accurate seed there. Isolated diagonal-adjacent nodes can sit past the
    reliable zone of the parametrization for wilder patches; those are
    skipped, and the whole stencil fails only when coverage drops below
    min_fraction. Returns (solved_nodes, samples).
    """
    solved, samples = [], []
    by_angle = {}
    prev = None
    for s, u in nodes:
        angle = round(np.degrees(np.arctan2(u, s)), 3)
        seeds = [None]
        if prev is not None:
            seeds.append((prev.t, prev.v, prev.r))
        if angle in by_angle:
            outer = by_angle[angle]
            scale = np.hypot(s, u) / np.hypot(outer.s, outer.u)
            # radial continuation: leading behaviour is linear or quadratic
            seeds.append((outer.t * scale, outer.v * scale, outer.r))
            seeds.append((outer.t * scale**2, outer.v * scale**2, outer.r))
        a = None
        for seed in seeds:
            try:
                a, _ = solve_ondiag_symmetric(scene, s, u, seed=seed)
                break
            except NoConvergenceError:
                continue
        if a is None:
            continue
        solved.append((s, u))
        samples.append(a)
        by_angle[angle] = a
        prev = a
    if len(solved) < max(min_fraction * len(nodes), 24):
        raise NoConvergenceError(
            f"stencil coverage too low: {len(solved)}/{len(nodes)} nodes solved"
        )
    return solved, samples


def symmetry_check(scene, h=DEFAULT_STENCIL):
    """Max |t(s, u) - v(u, s)| over the stencil and its swap."""
    nodes = stencil_nodes(h)
    worst = 0.0
    skipped = 0
    prev = None
    for s, u in nodes:
        try:
            try:
                a, b = solve_ondiag_symmetric(scene, s, u)
            except NoConvergenceError:
                if prev is None:
                    raise
                a, b = solve_ondiag_symmetric(scene, s, u, seed=(prev.t, prev.v, prev.r))
        except (NoConvergenceError, TrivialBranchError):
            skipped += 1
            continue
        prev = a
        worst = max(worst, abs(a.t - b.v), abs(a.v - b.t), abs(a.r - b.r))
    return {"max_defect": worst, "skipped": skipped, "nodes": len(nodes)}


def ondiag_classify(scene, h=DEFAULT_STENCIL, tol=None):
    """Classify h : (s, u) -> (s, t(s, u)) from the fitted series.

    The decision tolerance adapts to the fit's own error estimates: the
    classifier floor applies when the fit is cleaner than it, otherwise
    coefficients smaller than the observed fit error cannot be distinguished
    from zero and the tolerance widens accordingly.
    """
    from .classifier import DECISION_TOL, PlanarMapJet, classify

    rep = scene.meta.get("contact_report") or contact_type(scene.patch_m, scene.sphere)
    case = rep.klass.value
    fit = series_fit(scene, h, case)
    terms2 = {m: c for m, c in fit.t_coeffs.items() if sum(m) <= 4}
    jet = PlanarMapJet.from_terms({(1, 0): 1.0}, terms2)
    if tol is None:
        # per-quantity tolerances from the fit's own error estimates: the
        # det-J value reads the linear data of t, its gradient the
        # quadratic, its Hessian and the restriction the cubic
        err = fit.coeff_errors
        e1 = max((err.get(m, 0.0) for m in ((1, 0), (0, 1))), default=0.0)
        e2 = max((err.get(m, 0.0) for m in ((2, 0), (1, 1), (0, 2))), default=0.0)
        e3 = max((e for m, e in err.items() if sum(m) == 3), default=0.0)
        # det Hess(det J) = 12 c21 c03 - 4 c12^2 in the t-cubics; propagate
        # the cubic-coefficient noise through it to first order
        c21 = abs(fit.t_coeffs.get((2, 1), 0.0))
        c12 = abs(fit.t_coeffs.get((1, 2), 0.0))
        c03 = abs(fit.t_coeffs.get((0, 3), 0.0))
        hess_noise = e3 * (12 * c03 + 8 * c12 + 12 * c21) + 40 * e3**2
        tol = {
            "det": max(DECISION_TOL, 10.0 * e1),
            "grad": max(DECISION_TOL, 10.0 * e2),
            "hess": max(DECISION_TOL, 5.0 * hess_noise),
            "restrict": max(DECISION_TOL, 10.0 * e2),
        }
    result = classify(jet, tol)
    result.margins["decision_tol"] = tol if not isinstance(tol, dict) else dict(tol)
    return result, fit


def diagonal_limit_radii(scene, s, fractions=(0.5, 0.25, 0.125, 0.0625)):
    """Solved r as u -> s along a stencil ray (for the curvature-sphere limit).

    Near-diagonal conditioning caps the attainable residual around
    1e-11, so the solve tolerance is relaxed accordingly.
    """
    out = []
    for f in fractions:
        u = s * (1.0 - f)
        smp = solve_ondiag(scene, s, u, tol=1e-10)
        out.append((u, smp.r, smp.t))
    return out


def fold_preimages_1d(scene, s_star, t_star, u_range, n_scan=80):
    """Count u with t(s*, u) = t*: the second contacts of spheres at (s*, t*).

    Scans the u-line, brackets sign changes of t(s*, u) - t*, then refines
    each by bisection on the solved values. Returns the refined u roots.
    """
    us = np.linspace(u_range[0], u_range[1], n_scan)
    vals = []
    for u in us:
        if abs(u - s_star) < 1e-4:
            vals.append(np.nan)
            continue
        try:
            vals.append(solve_ondiag(scene, s_star, u).t - t_star)
        except (NoConvergenceError, TrivialBranchError):
            vals.append(np.nan)
    roots = []
    for k in range(len(us) - 1):
        a, b = vals[k], vals[k + 1]
        if np.isnan(a) or np.isnan(b) or (a < 0) == (b < 0):
            continue
        lo, hi = us[k], us[k + 1]
        flo = a
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            try:
                fm = solve_ondiag(scene, s_star, mid).t - t_star
            except (NoConvergenceError, TrivialBranchError):
                break
            if (fm < 0) == (flo < 0):
                lo, flo = mid, fm
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    return roots
