"""Monge-form surface patches, rigid embeddings, and sphere contact typing.

A patch is the polynomial graph z = (kappa1 x^2 + kappa2 y^2)/2 + cubic
+ quartic + quintic on a parameter box, embedded by a rigid motion. All
derivative data comes from exact jet arithmetic on the polynomial, so the
contact classification and the solver Jacobians carry no differencing noise.

Normals are oriented toward the tangent sphere's centre (+z in the patch
frame for every scene this module constructs); principal curvatures are
signed with respect to that orientation.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import NotTangentError, UmbilicPointError, UnrealizableSpecError
from .jets import Jet2, vdot, vnormalize

CONTACT_TOL = 1e-8
DEFAULT_BOX = 0.4


@dataclass(frozen=True)
class MongePatch:
    """Surface jet z = f(x, y) with principal axes along x, y at the origin."""

    kappa1: float
    kappa2: float
    cubic: tuple = (0.0, 0.0, 0.0, 0.0)  # b0 x^3 + b1 x^2 y + b2 x y^2 + b3 y^3
    quartic: tuple = (0.0, 0.0, 0.0, 0.0, 0.0)  # c0 x^4 .. c4 y^4
    quintic: tuple = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)  # d0 x^5 .. d5 y^5
    box: float = DEFAULT_BOX

    def __post_init__(self):
        if abs(self.kappa1 - self.kappa2) < 1e-9:
            raise UmbilicPointError("patch is umbilic at the origin")
        if len(self.cubic) != 4 or len(self.quartic) != 5 or len(self.quintic) != 6:
            raise ValueError("coefficient tuples must have lengths 4, 5, 6")

    def height_terms(self):
        terms = {(2, 0): 0.5 * self.kappa1, (0, 2): 0.5 * self.kappa2}
        for k, v in enumerate(self.cubic):
            terms[(3 - k, k)] = v
        for k, v in enumerate(self.quartic):
            terms[(4 - k, k)] = terms.get((4 - k, k), 0.0) + v
        for k, v in enumerate(self.quintic):
            terms[(5 - k, k)] = v
        return terms

    def height_jet(self, x0, y0, order):
        """Jet of f at (x0 + xi, y0 + eta); exact polynomial recentering."""
        f = Jet2.constant(0.0, order)
        xj = Jet2.variable("x", order, base=x0)
        yj = Jet2.variable("y", order, base=y0)
        xp = {0: Jet2.constant(1.0, order)}
        yp = {0: Jet2.constant(1.0, order)}
        for k in range(1, 6):
            xp[k] = xp[k - 1] * xj
            yp[k] = yp[k - 1] * yj
        for (i, j), v in self.height_terms().items():
            if v != 0.0:
                f = f + v * (xp[i] * yp[j])
        return f

    def in_box(self, x, y):
        return abs(x) <= self.box and abs(y) <= self.box

    def _coeff_grid(self):
        c = getattr(self, "_cgrid", None)
        if c is None:
            c = np.zeros((6, 6))
            for (i, j), v in self.height_terms().items():
                c[i, j] = v
            object.__setattr__(self, "_cgrid", c)
        return c

    def height_partials(self, x, y, order):
        """f and its partials to the given total order by direct evaluation."""
        c = self._coeff_grid()
        out = {}
        for i in range(order + 1):
            for j in range(order + 1 - i):
                d = c
                for _ in range(i):
                    d = d[1:, :] * np.arange(1, d.shape[0])[:, None]
                for _ in range(j):
                    d = d[:, 1:] * np.arange(1, d.shape[1])[None, :]
                xp = x ** np.arange(d.shape[0])
                yp = y ** np.arange(d.shape[1])
                out[(i, j)] = xp @ d @ yp
        return out


@dataclass(frozen=True)
class RigidMotion:
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float)
        t = np.asarray(self.translation, dtype=float)
        if np.max(np.abs(R.T @ R - np.eye(3))) > 1e-12:
            raise ValueError("rotation is not orthonormal to 1e-12")
        if abs(np.linalg.det(R) - 1.0) > 1e-12:
            raise ValueError("rotation must have determinant +1")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_axis_angle(cls, axis, angle, translation=(0.0, 0.0, 0.0)):
        axis = np.asarray(axis, dtype=float)
        n = np.linalg.norm(axis)
        if n == 0.0:
            return cls(np.eye(3), np.asarray(translation, dtype=float))
        k = axis / n
        K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
        R = np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * (K @ K)
        return cls(R, np.asarray(translation, dtype=float))

    def apply_point(self, p):
        return self.rotation @ np.asarray(p, dtype=float) + self.translation

    def apply_vector(self, v):
        return self.rotation @ np.asarray(v, dtype=float)

    def inverse_point(self, p):
        return self.rotation.T @ (np.asarray(p, dtype=float) - self.translation)

    def compose(self, other):
        """self after other: x -> self(other(x))."""
        return RigidMotion(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )


@dataclass(frozen=True)
class EmbeddedPatch:
    patch: MongePatch
    motion: RigidMotion

    def point_jets(self, x0, y0, order):
        """World-frame jets [X, Y, Z] of the embedded point at (x0, y0)."""
        f = self.patch.height_jet(x0, y0, order)
        local = [
            Jet2.variable("x", order, base=x0),
            Jet2.variable("y", order, base=y0),
            f,
        ]
        R, T = self.motion.rotation, self.motion.translation
        return [
            R[i, 0] * local[0] + R[i, 1] * local[1] + R[i, 2] * local[2] + T[i]
            for i in range(3)
        ]

    def normal_jets(self, x0, y0, order):
        """World-frame jets of the unit normal (toward-centre orientation)."""
        f = self.patch.height_jet(x0, y0, order + 1)
        fx = f.dx()
        fy = f.dy()
        h = [
            Jet2(-fx.c, order),
            Jet2(-fy.c, order),
            Jet2.constant(1.0, order),
        ]
        n = vnormalize(h)
        R = self.motion.rotation
        return [R[i, 0] * n[0] + R[i, 1] * n[1] + R[i, 2] * n[2] for i in range(3)]

    def point(self, x, y):
        fp = self.patch.height_partials(x, y, 0)
        return self.motion.apply_point([x, y, fp[(0, 0)]])

    def normal(self, x, y):
        fp = self.patch.height_partials(x, y, 1)
        h = np.array([-fp[(1, 0)], -fp[(0, 1)], 1.0])
        return self.motion.apply_vector(h / np.linalg.norm(h))

    def frame_first(self, x, y):
        """Point, normal and their first parameter derivatives (world frame).

        Returns (p, n, p_x, p_y, n_x, n_y); closed forms, no jet machinery,
        for the Newton hot loops.
        """
        fp = self.patch.height_partials(x, y, 2)
        fx, fy = fp[(1, 0)], fp[(0, 1)]
        fxx, fxy, fyy = fp[(2, 0)], fp[(1, 1)], fp[(0, 2)]
        h = np.array([-fx, -fy, 1.0])
        w2 = 1.0 + fx * fx + fy * fy
        w = np.sqrt(w2)
        hx = np.array([-fxx, -fxy, 0.0])
        hy = np.array([-fxy, -fyy, 0.0])
        wx = (fx * fxx + fy * fxy) / w
        wy = (fx * fxy + fy * fyy) / w
        n = h / w
        nx = hx / w - h * (wx / w2)
        ny = hy / w - h * (wy / w2)
        R, T = self.motion.rotation, self.motion.translation
        p = R @ np.array([x, y, fp[(0, 0)]]) + T
        return (
            p,
            R @ n,
            R @ np.array([1.0, 0.0, fx]),
            R @ np.array([0.0, 1.0, fy]),
            R @ nx,
            R @ ny,
        )


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("sphere radius must be positive")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))


@dataclass(frozen=True)
class PrincipalData:
    point: np.ndarray
    normal: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    kappa1: float
    kappa2: float
    kappa1_s: float  # derivative of kappa1 along e1 (arclength)
    kappa1_t: float  # derivative of kappa1 along e2


def _curvature_field_jets(patch, x0, y0, order):
    """Jets of (kappa1, kappa2) of a MongePatch around (x0, y0).

    kappa1 is the branch continuing the origin's first curvature (no
    umbilics in the box, so the eigenvalue branches never cross).
    """
    f = patch.height_jet(x0, y0, order + 2)
    fx, fy = f.dx(), f.dy()
    fxx, fxy, fyy = fx.dx(), fx.dy(), fy.dy()
    fx = Jet2(fx.c, order)
    fy = Jet2(fy.c, order)
    fxx = Jet2(fxx.c, order)
    fxy = Jet2(fxy.c, order)
    fyy = Jet2(fyy.c, order)
    E = 1.0 + fx * fx
    F = fx * fy
    G = 1.0 + fy * fy
    W = (1.0 + fx * fx + fy * fy).sqrt()
    L = fxx / W
    M = fxy / W
    N = fyy / W
    detI = E * G - F * F
    s11 = (G * L - F * M) / detI
    s12 = (G * M - F * N) / detI
    s21 = (E * M - F * L) / detI
    s22 = (E * N - F * M) / detI
    tr = s11 + s22
    disc = tr * tr - 4.0 * (s11 * s22 - s12 * s21)
    root = disc.sqrt()
    sigma = 1.0 if patch.kappa1 >= patch.kappa2 else -1.0
    k1 = 0.5 * (tr + sigma * root)
    k2 = 0.5 * (tr - sigma * root)
    shape = np.array([[s11.value(), s12.value()], [s21.value(), s22.value()]])
    return k1, k2, shape


def principal_data(embedded, x, y):
    """Principal frame and curvature derivatives at patch parameters (x, y)."""
    patch = embedded.patch
    if not patch.in_box(x, y):
        raise ValueError("parameters outside the patch box")
    k1j, k2j, shape = _curvature_field_jets(patch, x, y, 1)
    k1, k2 = k1j.value(), k2j.value()
    if abs(k1 - k2) < 1e-9:
        raise UmbilicPointError(f"umbilic point at ({x}, {y})")

    f = patch.height_jet(x, y, 1)
    fx, fy = f.dx().value(), f.dy().value()
    px = np.array([1.0, 0.0, fx])
    py = np.array([0.0, 1.0, fy])

    # eigenvectors of the shape operator in the (px, py) tangent basis
    def eigvec(lmbda):
        A = shape - lmbda * np.eye(2)
        v = np.array([A[0, 1], -A[0, 0]])
        if np.linalg.norm(v) < 1e-12:
            v = np.array([A[1, 1], -A[1, 0]])
        return v

    v1 = eigvec(k1)
    v2 = eigvec(k2)
    e1 = v1[0] * px + v1[1] * py
    e2 = v2[0] * px + v2[1] * py
    e1 /= np.linalg.norm(e1)
    e2 /= np.linalg.norm(e2)
    # deterministic orientation continuing the origin's (x, y) axes
    if e1[0] < 0 or (e1[0] == 0 and e1[1] < 0):
        e1 = -e1
    if e2[1] < 0 or (e2[1] == 0 and e2[0] < 0):
        e2 = -e2

    # parameter-space directions of unit steps along e1, e2, for the chain rule
    I = np.array([[px @ px, px @ py], [px @ py, py @ py]])
    grad_k1 = np.array([k1j.partial(1, 0), k1j.partial(0, 1)])
    xi1 = np.linalg.solve(I, np.array([px @ e1, py @ e1]))
    xi2 = np.linalg.solve(I, np.array([px @ e2, py @ e2]))
    k1s = grad_k1 @ xi1
    k1t = grad_k1 @ xi2

    R = embedded.motion.rotation
    return PrincipalData(
        point=embedded.point(x, y),
        normal=embedded.normal(x, y),
        e1=R @ e1,
        e2=R @ e2,
        kappa1=k1,
        kappa2=k2,
        kappa1_s=k1s,
        kappa1_t=k1t,
    )


# -- sphere contact classification ------------------------------------------


class ContactClass(Enum):
    A1 = "A1"
    A2 = "A2"
    A3 = "A3"
    A4 = "A4"
    A5 = "A5"
    NOT_TANGENT = "NotTangent"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class ContactReport:
    klass: ContactClass
    margins: dict
    reduced: tuple = ()  # coefficients of the reduced contact function
    axis: str = "x"  # kernel axis of the contact Hessian


def eq9_numerator(patch):
    """Quartic-degeneracy gate: zero exactly at A4 (given A3 conditions)."""
    k1, k2 = patch.kappa1, patch.kappa2
    c0 = patch.quartic[0]
    b1 = patch.cubic[1]
    return k1**3 * k2 - k1**4 - 8 * c0 * k2 + 8 * c0 * k1 + 4 * b1**2


def eq9_denominator(patch):
    k1, k2 = patch.kappa1, patch.kappa2
    c1 = patch.quartic[1]
    b1, b2 = patch.cubic[1], patch.cubic[2]
    return c1 * k2 - c1 * k1 - 2 * b1 * b2


def t02_numerator(patch):
    """Quintic-degeneracy gate: zero exactly at A5 (given A4 conditions)."""
    k1, k2 = patch.kappa1, patch.kappa2
    b1, b2 = patch.cubic[1], patch.cubic[2]
    c1 = patch.quartic[1]
    d0 = patch.quintic[0]
    return 3.0 * (d0 * (k1 - k2) ** 2 + b1 * c1 * (k1 - k2) + b1**2 * b2)


def _swap_axes(patch):
    """The same surface with x and y exchanged (kernel along y handled by swap)."""
    b0, b1, b2, b3 = patch.cubic
    c0, c1, c2, c3, c4 = patch.quartic
    d0, d1, d2, d3, d4, d5 = patch.quintic
    return MongePatch(
        patch.kappa2,
        patch.kappa1,
        cubic=(b3, b2, b1, b0),
        quartic=(c4, c3, c2, c1, c0),
        quintic=(d5, d4, d3, d2, d1, d0),
        box=patch.box,
    )


def _reduce_contact_jet(h, order):
    """Reduce h(x, y) with corank-1 Hessian (kernel = x-axis) to h~(x).

    Solves h_y(x, phi(x)) = 0 for the series phi and returns the univariate
    coefficients of h(x, phi(x)) up to the given order.
    """
    from .jets import eval_along

    hy = h.dy()
    phi = np.zeros(order + 1)
    hyy0 = h.partial(0, 2)
    for _ in range(order):
        vals = eval_along(hy, np.eye(1, order + 1, 1).ravel(), phi)
        phi[1:] -= vals[1:] / hyy0
        phi[0] = 0.0
    return eval_along(h, np.eye(1, order + 1, 1).ravel(), phi)


def contact_type(embedded, sphere, tol=CONTACT_TOL):
    """Contact class of a sphere tangent to the patch at its origin.

    The class is read off the jet of the contact function
    h(x, y) = |p(x, y) - centre|^2 - r^2, cross-checked against the
    closed-form coefficient gates; the report carries every margin.
    """
    patch = embedded.patch
    c_local = embedded.motion.inverse_point(sphere.center)
    r = sphere.radius
    dist_defect = abs(np.linalg.norm(c_local) - r)
    align_defect = np.linalg.norm(c_local[:2])
    if dist_defect > 1e-10 or align_defect > 1e-10 or c_local[2] < 0:
        return ContactReport(
            ContactClass.NOT_TANGENT,
            {"distance_defect": dist_defect, "normal_alignment": align_defect},
        )

    # contact function jet in patch coordinates; the patch is polynomial, so
    # the degree-6 jet is exact
    order = 6
    f = patch.height_jet(0.0, 0.0, order)
    x = Jet2.variable("x", order)
    y = Jet2.variable("y", order)
    h = x * x + y * y + f * f - (2.0 * r) * f

    q1 = h.coeff(2, 0)  # 1 - r*kappa1
    q2 = h.coeff(0, 2)  # 1 - r*kappa2
    margins = {
        "one_minus_r_kappa1": q1,
        "one_minus_r_kappa2": q2,
        "eq9_numerator": eq9_numerator(patch),
        "t02_numerator": t02_numerator(patch),
    }
    if abs(q1) > tol and abs(q2) > tol:
        return ContactReport(ContactClass.A1, margins)
    if abs(q1) <= tol and abs(q2) <= tol:
        return ContactReport(ContactClass.DEGENERATE, margins)

    axis = "x"
    if abs(q2) <= tol:  # kernel along y: swap roles
        axis = "y"
        patch_sw = _swap_axes(patch)
        f = patch_sw.height_jet(0.0, 0.0, order)
        h = x * x + y * y + f * f - (2.0 * r) * f
        margins["eq9_numerator"] = eq9_numerator(patch_sw)
        margins["t02_numerator"] = t02_numerator(patch_sw)

    red = _reduce_contact_jet(h, order)
    margins["reduced_cubic"] = red[3]
    margins["reduced_quartic"] = red[4]
    margins["reduced_quintic"] = red[5]
    margins["reduced_sextic"] = red[6]
    if abs(red[3]) > tol:
        klass = ContactClass.A2
    elif abs(red[4]) > tol:
        klass = ContactClass.A3
    elif abs(red[5]) > tol:
        klass = ContactClass.A4
    elif abs(red[6]) > tol:
        klass = ContactClass.A5
    else:
        klass = ContactClass.DEGENERATE
    return ContactReport(klass, margins, reduced=tuple(red), axis=axis)


# -- scene construction ------------------------------------------------------


@dataclass(frozen=True)
class BitangentScene:
    """One or two embedded patches tangent to a common base sphere."""

    patch_m: EmbeddedPatch
    sphere: Sphere
    contact_m: ContactClass
    patch_n: EmbeddedPatch = None
    contact_n: ContactClass = None
    meta: dict = field(default_factory=dict)

    @property
    def on_diagonal(self):
        return self.patch_n is None

    def validate(self, tol=1e-10):
        c, r = self.sphere.center, self.sphere.radius
        for emb in (self.patch_m,) + (() if self.on_diagonal else (self.patch_n,)):
            p0 = emb.point(0.0, 0.0)
            n0 = emb.normal(0.0, 0.0)
            if abs(np.linalg.norm(p0 - c) - r) > tol:
                raise UnrealizableSpecError("sphere not tangent at a base point")
            if np.linalg.norm(np.cross(n0, c - p0)) > tol * r:
                raise UnrealizableSpecError("base normal misses the sphere centre")


def _impose_contact(kind, r0, kappa2, cubic, quartic, quintic, box):
    """Patch-M coefficients realizing the requested contact with the r0 sphere."""
    k1 = 1.0 / r0
    cubic = list(cubic)
    quartic = list(quartic)
    quintic = list(quintic)
    if kind in ("A2", "A3", "A4", "A5"):
        if abs(kappa2 - k1) < 1e-6:
            raise UnrealizableSpecError("kappa2 too close to 1/r0 (umbilic sphere)")
    if kind == "A2":
        if cubic[0] == 0.0:
            raise UnrealizableSpecError("A2 needs a nonzero leading cubic (b0)")
    elif kind in ("A3", "A4", "A5"):
        cubic[0] = 0.0
    if kind in ("A4", "A5"):
        # solve the quartic-degeneracy gate for c0
        b1 = cubic[1]
        quartic[0] = (k1**3 * kappa2 - k1**4 + 4 * b1**2) / (8.0 * (kappa2 - k1))
    if kind == "A5":
        b1, b2 = cubic[1], cubic[2]
        c1 = quartic[1]
        if abs(k1 - kappa2) < 1e-9:
            raise UnrealizableSpecError("degenerate curvature split for A5")
        quintic[0] = -(b1 * c1 * (k1 - kappa2) + b1**2 * b2) / (k1 - kappa2) ** 2
    return MongePatch(k1, kappa2, tuple(cubic), tuple(quartic), tuple(quintic), box)


@dataclass(frozen=True)
class SceneSpec:
    """Free data for construct_scene; contact constraints are imposed on top."""

    contact_m: str
    contact_n: str = "A1"
    r0: float = 1.0
    chord_angle: float = 1.1
    chord_azimuth: float = 0.35
    m_kappa1: float = 0.7  # used only for A1 at M
    m_kappa2: float = 1.9
    m_cubic: tuple = (0.0, 0.0, 0.0, 0.0)
    m_quartic: tuple = (0.0, 0.0, 0.0, 0.0, 0.0)
    m_quintic: tuple = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    n_kappa1: float = -0.35
    n_kappa2: float = 0.55
    n_cubic: tuple = (0.0, 0.0, 0.0, 0.0)
    n_quartic: tuple = (0.0, 0.0, 0.0, 0.0, 0.0)
    n_quintic: tuple = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    box: float = DEFAULT_BOX
    transitional: bool = False  # place q0 in the osculating plane of the
    # kappa1 line of curvature (A3 at M)


def ridge_osculating_normal(patch):
    """Unit normal of the osculating plane of the kappa1 curvature line.

    In the patch frame at the origin: the line of curvature through the
    origin tangent to e1 has geodesic curvature 2 b1 / (kappa1 - kappa2),
    so the plane is spanned by e1 and kappa1 m + kg e2.
    """
    kg = 2.0 * patch.cubic[1] / (patch.kappa1 - patch.kappa2)
    n = np.array([0.0, -patch.kappa1, kg])
    return n / np.linalg.norm(n)


def assemble_scene(patch_m, patch_n, r0, chord_angle, chord_azimuth=0.0,
                   transitional=False):
    """Two-patch scene from verbatim patches (no contact imposition).

    The sphere centre sits at (0, 0, r0) in M's frame; N is rotated so its
    base normal points at the centre from the chord-angle position. The
    realized contact classes are detected and recorded, not prescribed.
    """
    if not 0.0 < chord_angle < np.pi:
        raise UnrealizableSpecError("chord angle must lie in (0, pi)")
    emb_m = EmbeddedPatch(patch_m, RigidMotion.identity())
    center = np.array([0.0, 0.0, r0])
    sphere = Sphere(center, r0)
    theta = chord_angle
    phi = chord_azimuth
    if transitional:
        # azimuth solving q0 . plane-normal = 0 for the osculating plane
        pn = ridge_osculating_normal(patch_m)
        rhs = -pn[2] * (1.0 - np.cos(theta)) / np.sin(theta)
        if abs(pn[1]) < 1e-14:
            raise UnrealizableSpecError("osculating plane parallel to the chord fan")
        val = rhs / pn[1]
        if abs(val) > 1.0:
            raise UnrealizableSpecError("osculating plane misses the chord circle")
        phi = np.arcsin(val)
    omega = np.array(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), -np.cos(theta)]
    )
    q0 = center + r0 * omega
    n0 = -omega
    f1 = np.array(
        [np.cos(theta) * np.cos(phi), np.cos(theta) * np.sin(phi), np.sin(theta)]
    )
    f2 = np.cross(n0, f1)
    R = np.column_stack([f1, f2, n0])
    emb_n = EmbeddedPatch(patch_n, RigidMotion(R, q0))
    rep_m = contact_type(emb_m, sphere)
    rep_n = contact_type(emb_n, sphere)
    scene = BitangentScene(
        emb_m, sphere, rep_m.klass, emb_n, rep_n.klass,
        meta={"chord_azimuth": float(phi)},
    )
    scene.validate()
    return scene


def construct_scene(spec):
    """Realize a two-patch scene with prescribed contact types at the origin.

    Imposes the coefficient constraints of the requested class on the first
    patch, then verifies the round trip: the realized contact types must
    equal the requested ones.
    """
    r0 = spec.r0
    if spec.contact_m == "A1":
        for k in (spec.m_kappa1, spec.m_kappa2):
            if abs(1.0 - r0 * k) < 1e-6:
                raise UnrealizableSpecError("A1 at M needs r0 away from 1/kappa")
        patch_m = MongePatch(
            spec.m_kappa1, spec.m_kappa2, spec.m_cubic, spec.m_quartic,
            spec.m_quintic, spec.box,
        )
    else:
        patch_m = _impose_contact(
            spec.contact_m, r0, spec.m_kappa2, spec.m_cubic, spec.m_quartic,
            spec.m_quintic, spec.box,
        )
    if spec.contact_n != "A1":
        raise UnrealizableSpecError("second contact must be A1 here")
    for lam in (spec.n_kappa1, spec.n_kappa2):
        if abs(1.0 - r0 * lam) < 1e-6:
            raise UnrealizableSpecError("A1 at N needs r0 away from 1/lambda")
    patch_n = MongePatch(
        spec.n_kappa1, spec.n_kappa2, spec.n_cubic, spec.n_quartic,
        spec.n_quintic, spec.box,
    )
    scene = assemble_scene(
        patch_m, patch_n, r0, spec.chord_angle, spec.chord_azimuth, spec.transitional
    )
    if (
        scene.contact_m.value != spec.contact_m
        or scene.contact_n.value != spec.contact_n
    ):
        raise UnrealizableSpecError(
            f"requested {spec.contact_m}{spec.contact_n}, realized "
            f"{scene.contact_m.value}{scene.contact_n.value}"
        )
    scene.meta["spec"] = spec
    return scene


def curvature_sphere_scene(patch):
    """Single-patch scene with the kappa1 curvature sphere at the origin."""
    if patch.kappa1 <= 0:
        raise UnrealizableSpecError("curvature sphere needs kappa1 > 0")
    r0 = 1.0 / patch.kappa1
    emb = EmbeddedPatch(patch, RigidMotion.identity())
    sphere = Sphere(np.array([0.0, 0.0, r0]), r0)
    rep = contact_type(emb, sphere)
    scene = BitangentScene(emb, sphere, rep.klass, meta={"contact_report": rep})
    scene.validate()
    return scene
