"""Tracing the 2D pre-symmetry set and the two-circle implicit analysis.

The torus tracer runs marching squares on the bitangency residual over the
parameter square, polishes every crossing by 1D Newton along the residual
gradient, links segments into branches, and prunes the spurious components
(diagonal band, same-direction parallel tangents without a finite bitangent
circle).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ContactMismatchError, NoBranchesError
from .geometry2d import curvature_derivative, curve_frame

TWO_PI = 2.0 * np.pi


def residual_g(curve, s, t, sign=-1):
    """Bitangency residual (gamma(s) - gamma(t)) . (T(s) +/- T(t))."""
    ps, ts, *_ = curve_frame(curve, np.asarray(s, dtype=float))
    pt, tt, *_ = curve_frame(curve, np.asarray(t, dtype=float))
    w = ts + tt if sign > 0 else ts - tt
    return np.sum((ps - pt) * w, axis=-1)


def _grad_g(curve, s, t):
    """Gradient of the minus-sign residual in (s, t)."""
    d_s = curve.derivatives(s, 2)
    d_t = curve.derivatives(t, 2)
    g1s, g1t = d_s[1], d_t[1]
    sp_s = np.linalg.norm(g1s, axis=-1)
    sp_t = np.linalg.norm(g1t, axis=-1)
    Ts = g1s / sp_s[..., None]
    Tt = g1t / sp_t[..., None]
    Ns = np.stack([-Ts[..., 1], Ts[..., 0]], axis=-1)
    Nt = np.stack([-Tt[..., 1], Tt[..., 0]], axis=-1)
    ks = (g1s[..., 0] * d_s[2][..., 1] - g1s[..., 1] * d_s[2][..., 0]) / sp_s**3
    kt = (g1t[..., 0] * d_t[2][..., 1] - g1t[..., 1] * d_t[2][..., 0]) / sp_t**3
    chord = d_s[0] - d_t[0]
    dTs = (ks * sp_s)[..., None] * Ns
    dTt = (kt * sp_t)[..., None] * Nt
    gs = np.sum(g1s * (Ts - Tt), axis=-1) + np.sum(chord * dTs, axis=-1)
    gt = -np.sum(g1t * (Ts - Tt), axis=-1) - np.sum(chord * dTt, axis=-1)
    return gs, gt


@dataclass
class PreSymCurve2D:
    """Traced pre-symmetry branches on the parameter torus."""

    branches: list  # list of (n_i, 2) arrays of (s, t)
    residuals: list  # list of (n_i,) arrays of |g|
    near_diagonal: list = field(default_factory=list)  # per-branch bool arrays
    antiparallel: list = field(default_factory=list)  # per-branch bool arrays

    def samples(self):
        if not self.branches:
            return np.zeros((0, 3))
        rows = []
        for b, (pts, res) in enumerate(zip(self.branches, self.residuals)):
            rows.append(
                np.column_stack([np.full(len(pts), b, dtype=float), pts, res])
            )
        return np.vstack(rows)


def _torus_dist(a, b):
    d = np.abs(a - b) % TWO_PI
    return np.minimum(d, TWO_PI - d)


def trace_presym2d(curve, grid=256, exclusion=0.05, tol=1e-10,
                   angular_tol=1e-9, degenerate_eps=1e-12):
    """Trace the minus-sign zero set over the torus, excluding spurious parts.

    grid        nodes per axis (>= 64)
    exclusion   half-width of the diagonal band |s - t| removed (radians)
    """
    if grid < 64:
        raise ValueError("grid must be at least 64 per axis")
    if exclusion <= 0:
        raise ValueError("exclusion band must be positive")
    axis = np.arange(grid) * TWO_PI / grid
    S, T = np.meshgrid(axis, axis, indexing="ij")
    G = residual_g(curve, S, T, sign=-1)

    scale = max(np.max(np.abs(G)), 1.0)
    masked = _torus_dist(S, T) < exclusion

    segs = _marching_squares_torus(G, masked, axis, degenerate_eps * scale)
    if not segs:
        raise NoBranchesError("zero set empty away from exclusions")

    chains = _link_segments(segs, grid)
    branches, residuals, near_diag, antipar = [], [], [], []
    for chain in chains:
        pts = np.array(chain)
        pts, res = _newton_polish(curve, pts, tol)
        keep = _prune_spurious(curve, pts, exclusion, angular_tol)
        if np.count_nonzero(keep) < 2:
            continue
        pts, res = pts[keep], res[keep]
        branches.append(pts)
        residuals.append(res)
        near_diag.append(_torus_dist(pts[:, 0], pts[:, 1]) < 2.0 * exclusion)
        Ts = curve_frame(curve, pts[:, 0])[1]
        Tt = curve_frame(curve, pts[:, 1])[1]
        antipar.append(np.sum(Ts * Tt, axis=-1) < -1.0 + 1e-6)
    if not branches:
        raise NoBranchesError("all traced segments pruned as spurious")
    return PreSymCurve2D(branches, residuals, near_diag, antipar)


def _marching_squares_torus(G, masked, axis, eps):
    """Edge-interpolated crossing segments per cell; periodic in both axes.

    Cells with all corner values below eps are treated as degenerate (the
    residual vanishes identically there, e.g. a circle) and skipped.
    """
    n = G.shape[0]
    step = axis[1] - axis[0]
    segs = []
    # nudge exact corner zeros off zero so crossings stay on edge interiors
    # (done after the degenerate-cell test below, which needs raw values)
    G0 = G
    Gr = np.roll(G, -1, axis=0)
    Gc = np.roll(G, -1, axis=1)
    Grc = np.roll(Gr, -1, axis=1)
    Mr = np.roll(masked, -1, axis=0)
    Mc = np.roll(masked, -1, axis=1)
    Mrc = np.roll(Mr, -1, axis=1)
    bad = masked | Mr | Mc | Mrc
    degen = (
        (np.abs(G) < eps) & (np.abs(Gr) < eps) & (np.abs(Gc) < eps) & (np.abs(Grc) < eps)
    )
    G = np.where(np.abs(G0) < eps, eps, G0)
    Gr = np.roll(G, -1, axis=0)
    Gc = np.roll(G, -1, axis=1)
    Grc = np.roll(Gr, -1, axis=1)
    sgn = np.sign(G)
    has_cross = ~bad & ~degen & (
        (sgn != np.sign(Gr)) | (sgn != np.sign(Gc)) | (np.sign(Gr) != np.sign(Grc))
        | (np.sign(Gc) != np.sign(Grc))
    )
    ii, jj = np.nonzero(has_cross)
    for i, j in zip(ii, jj):
        c00, c10 = G[i, j], Gr[i, j]
        c01, c11 = Gc[i, j], Grc[i, j]
        pts = []
        # edge keys identify shared edges between neighbouring cells
        for (a, b, key, interp) in (
            (c00, c10, ("s", i, j), lambda f: (axis[i] + f * step, axis[j])),
            (c01, c11, ("s", i, (j + 1) % n), lambda f: (axis[i] + f * step, axis[(j + 1) % n] if j + 1 < n else TWO_PI)),
            (c00, c01, ("t", i, j), lambda f: (axis[i], axis[j] + f * step)),
            (c10, c11, ("t", (i + 1) % n, j), lambda f: (axis[(i + 1) % n] if i + 1 < n else TWO_PI, axis[j] + f * step)),
        ):
            if a == 0.0 and b == 0.0:
                continue
            if (a <= 0 < b) or (b <= 0 < a) or (a < 0 <= b) or (b < 0 <= a):
                f = a / (a - b)
                pts.append((key, interp(f)))
        if len(pts) == 2:
            segs.append((pts[0], pts[1]))
        elif len(pts) == 4:
            # saddle cell: pair by the sign of the centre value
            centre = 0.25 * (c00 + c10 + c01 + c11)
            order = (0, 3, 1, 2) if (centre > 0) == (c00 > 0) else (0, 2, 1, 3)
            segs.append((pts[order[0]], pts[order[1]]))
            segs.append((pts[order[2]], pts[order[3]]))
    return segs


def _link_segments(segs, grid):
    """Join crossing segments into polylines via shared edge keys."""
    adj = {}
    for a, b in segs:
        adj.setdefault(a[0], []).append((b[0], a[1], b[1]))
        adj.setdefault(b[0], []).append((a[0], b[1], a[1]))
    seen = set()
    chains = []
    for start in list(adj):
        if start in seen or len(adj[start]) != 1:
            continue
        chains.append(_walk(adj, start, seen))
    for start in list(adj):  # closed loops
        if start not in seen:
            chains.append(_walk(adj, start, seen))
    return [c for c in chains if len(c) >= 2]


def _walk(adj, start, seen):
    chain = []
    prev = None
    cur = start
    while cur is not None and cur not in seen:
        seen.add(cur)
        nxts = adj[cur]
        pos = nxts[0][1]
        chain.append(pos)
        step = None
        for nk, _, npos in nxts:
            if nk != prev and nk not in seen:
                step = nk
                break
        prev = cur
        cur = step
    return chain


def _newton_polish(curve, pts, tol):
    """Move each sample along the residual gradient to the attainable floor.

    Near diagonal crossings the transverse gradient is small, so |g| < tol
    alone leaves positional error ~ tol/|grad|; iterating to stagnation
    recovers full positional accuracy.
    """
    s, t = pts[:, 0].copy(), pts[:, 1].copy()
    best = np.abs(residual_g(curve, s, t, sign=-1))
    for _ in range(50):
        g = residual_g(curve, s, t, sign=-1)
        gs, gt = _grad_g(curve, s, t)
        norm2 = gs**2 + gt**2
        norm2 = np.where(norm2 < 1e-30, 1.0, norm2)
        s2 = s - g * gs / norm2
        t2 = t - g * gt / norm2
        g2 = np.abs(residual_g(curve, s2, t2, sign=-1))
        improved = g2 <= best
        s = np.where(improved, s2, s)
        t = np.where(improved, t2, t)
        best = np.where(improved, g2, best)
        if not np.any(improved & (best > 0)):
            break
    return np.column_stack([s % TWO_PI, t % TWO_PI]), best


def _prune_spurious(curve, pts, exclusion, angular_tol):
    """Drop diagonal-band points and parallel-tangent pairs without a circle."""
    s, t = pts[:, 0], pts[:, 1]
    keep = _torus_dist(s, t) >= exclusion
    ps, Ts, *_ = curve_frame(curve, s)
    pt, Tt, *_ = curve_frame(curve, t)
    cross = Ts[:, 0] * Tt[:, 1] - Ts[:, 1] * Tt[:, 0]
    dot = np.sum(Ts * Tt, axis=-1)
    chord = ps - pt
    # same-direction parallel tangents vanish identically in the residual;
    # keep only if the chord is perpendicular to them (finite circle exists)
    parallel_same = (np.abs(cross) < angular_tol) & (dot > 0)
    chord_norm = np.linalg.norm(chord, axis=-1)
    chord_tang = np.abs(np.sum(chord * Ts, axis=-1))
    no_circle = chord_tang > 1e-8 * np.maximum(chord_norm, 1e-12)
    keep &= ~(parallel_same & no_circle)
    return keep


def bitangent_circle_center(curve, s, t):
    """Reconstruct the bitangent circle through the contacts at s and t.

    The centre solves the two tangency conditions (centre on each normal
    line) together with equidistance (centre on the radical line), in least
    squares so the antiparallel-tangent limit stays well conditioned.
    Returns (center, radius, defect) with defect = | |c - gamma(t)| - r |.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    ps, Ts, _, _ = curve_frame(curve, s)
    pt, Tt, _, _ = curve_frame(curve, t)
    centers = np.zeros_like(ps)
    for i in range(len(s)):
        A = np.vstack([Ts[i], Tt[i], ps[i] - pt[i]])
        b = np.array(
            [Ts[i] @ ps[i], Tt[i] @ pt[i], (ps[i] - pt[i]) @ (ps[i] + pt[i]) / 2.0]
        )
        centers[i], *_ = np.linalg.lstsq(A, b, rcond=None)
    r = np.linalg.norm(centers - ps, axis=-1)
    defect = np.abs(np.linalg.norm(centers - pt, axis=-1) - r)
    return centers, r, defect


# -- two-circle implicit analysis ------------------------------------------


@dataclass
class A1A3Analysis:
    s0: float
    t0: float
    r0: float
    t1: float
    t2: float
    t3: float
    r1: float
    r2: float
    err_t: tuple
    err_r: tuple
    samples: np.ndarray  # columns s, t(s), r(s)


def _two_curve_residual(curveM, curveN, s, t, r):
    p, Tm, m, _ = curve_frame(curveM, s)
    q, Tn, n, _ = curve_frame(curveN, t)
    return p + r * m - q - r * n


def _solve_tr(curveM, curveN, s, t, r, tol=1e-13, itmax=40):
    for _ in range(itmax):
        F = _two_curve_residual(curveM, curveN, s, t, r)
        if np.max(np.abs(F)) < tol:
            break
        q, Tn, n, lam = curve_frame(curveN, t)
        speed = np.linalg.norm(curveN.derivatives(t, 1)[1])
        _, _, m, _ = curve_frame(curveM, s)
        col_t = -speed * (1.0 - r * lam) * Tn
        col_r = m - n
        J = np.column_stack([col_t, col_r])
        dt, dr = np.linalg.solve(J, -F)
        t += dt
        r += dr
    return t, r


def a1a3_analyze(curveM, curveN, s0, t0, r0, step=1e-3,
                 sample_halfwidth=0.06, sample_count=49):
    """Implicit derivatives of t(s), r(s) near a vertex-contact configuration.

    The contact at s0 must be a vertex with its curvature circle of radius
    r0 (r0*kappa = 1, kappa' = 0); the contact at t0 must be ordinary.
    Derivatives come from 5-point central differences of the Newton-implicit
    solution at the given step, Richardson-extrapolated once.
    """
    _, _, _, kap = curve_frame(curveM, s0)
    kapd = curvature_derivative(curveM, s0)
    if abs(r0 * kap - 1.0) > 1e-8 or abs(kapd) > 1e-8:
        raise ContactMismatchError(
            f"contact at s0 not A3: r0*kappa-1={r0 * kap - 1.0:.3e}, kappa'={kapd:.3e}"
        )
    _, _, _, lam = curve_frame(curveN, t0)
    if abs(r0 * lam - 1.0) < 1e-8:
        raise ContactMismatchError("contact at t0 not A1: r0*lambda = 1")

    def solve_at(s):
        t, r = _solve_tr(curveM, curveN, s, t0, r0)
        return t, r

    def stencil(h):
        ts, rs = [], []
        for k in (-2, -1, 0, 1, 2):
            t, r = solve_at(s0 + k * h)
            ts.append(t)
            rs.append(r)
        ts = np.array(ts)
        rs = np.array(rs)
        d1 = (ts[0] - 8 * ts[1] + 8 * ts[3] - ts[4]) / (12 * h)
        d2 = (-ts[0] + 16 * ts[1] - 30 * ts[2] + 16 * ts[3] - ts[4]) / (12 * h * h)
        d3 = (-ts[0] + 2 * ts[1] - 2 * ts[3] + ts[4]) / (2 * h**3)
        e1 = (rs[0] - 8 * rs[1] + 8 * rs[3] - rs[4]) / (12 * h)
        e2 = (-rs[0] + 16 * rs[1] - 30 * rs[2] + 16 * rs[3] - rs[4]) / (12 * h * h)
        return d1, d2, d3, e1, e2

    A = stencil(step)
    B = stencil(step / 2)
    # 5-point first/second derivatives are O(h^4); the third is O(h^2)
    t1 = (16 * B[0] - A[0]) / 15
    t2 = (16 * B[1] - A[1]) / 15
    t3 = (4 * B[2] - A[2]) / 3
    r1 = (16 * B[3] - A[3]) / 15
    r2 = (16 * B[4] - A[4]) / 15
    err_t = (abs(B[0] - A[0]), abs(B[1] - A[1]), abs(B[2] - A[2]))
    err_r = (abs(B[3] - A[3]), abs(B[4] - A[4]))

    ss = s0 + np.linspace(-sample_halfwidth, sample_halfwidth, sample_count)
    rows = []
    for s in ss:
        t, r = solve_at(s)
        rows.append((s, t, r))
    return A1A3Analysis(s0, t0, r0, t1, t2, t3, r1, r2, err_t, err_r,
                        np.array(rows))


def count_extrema(values, noise=1e-12):
    """Strict interior local extrema of a sampled sequence."""
    v = np.asarray(values, dtype=float)
    d = np.diff(v)
    d = np.where(np.abs(d) < noise, 0.0, d)
    sgn = np.sign(d)
    sgn = sgn[sgn != 0]
    return int(np.sum(sgn[1:] * sgn[:-1] < 0))
