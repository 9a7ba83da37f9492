"""Plane-curve families, frames, and local vertex models.

Curve families are closed-form (ellipse, radial-Fourier perturbed circle,
polynomial local graph), so parameter derivatives up to order 6 are exact.
The frame convention is: normal = tangent rotated +90 degrees, curvature
signed accordingly.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import UnsupportedDegeneracyError

MAX_DERIV = 6


@dataclass(frozen=True)
class PlaneCurve:
    """A smooth plane curve from one of the closed-form families.

    family 'ellipse': params (a, b), angle parameter on [0, 2pi).
    family 'perturbed-circle': params (radius, cos_amps, sin_amps) giving
        r(s) = radius * (1 + sum_k cos_amps[k-1] cos ks + sin_amps[k-1] sin ks).
    family 'local-graph': params (a2, a4, a5, a6) for y = a2 x^2 + a4 x^4
        + a5 x^5 + a6 x^6 (no cubic term; callers pre-normalize), plus a
        rigid pose (rotation angle, translation) and a parameter half-width.
    """

    family: str
    a: float = 0.0
    b: float = 0.0
    radius: float = 1.0
    cos_amps: tuple = ()
    sin_amps: tuple = ()
    coeffs: tuple = (1.0, 0.0, 0.0, 0.0)  # a2, a4, a5, a6
    pose_angle: float = 0.0
    pose_offset: tuple = (0.0, 0.0)
    halfwidth: float = 0.5

    def __post_init__(self):
        if self.family not in ("ellipse", "perturbed-circle", "local-graph"):
            raise ValueError(f"unknown curve family '{self.family}'")
        if self.family == "ellipse" and (self.a <= 0 or self.b <= 0):
            raise ValueError("ellipse semi-axes must be positive")
        if self.family == "local-graph" and self.coeffs[0] == 0.0:
            raise ValueError("local-graph needs a2 != 0")

    @property
    def closed(self):
        return self.family != "local-graph"

    def domain(self):
        if self.closed:
            return 0.0, 2.0 * np.pi
        return -self.halfwidth, self.halfwidth

    def derivatives(self, s, order):
        """Stack of gamma^(k)(s) for k = 0..order; s scalar or array.

        Returns an array of shape (order+1, ..., 2). Exact for all families.
        """
        if order > MAX_DERIV:
            raise ValueError(f"derivative order {order} > {MAX_DERIV}")
        s = np.asarray(s, dtype=float)
        out = np.zeros((order + 1,) + s.shape + (2,))
        if self.family == "ellipse":
            for k in range(order + 1):
                out[k, ..., 0] = self.a * np.cos(s + k * np.pi / 2)
                out[k, ..., 1] = self.b * np.sin(s + k * np.pi / 2)
        elif self.family == "perturbed-circle":
            r = np.zeros((order + 1,) + s.shape)
            r[0] = 1.0
            for m, amp_c in enumerate(self.cos_amps, start=1):
                amp_s = self.sin_amps[m - 1] if m - 1 < len(self.sin_amps) else 0.0
                for k in range(order + 1):
                    r[k] += (m**k) * (
                        amp_c * np.cos(m * s + k * np.pi / 2)
                        + amp_s * np.sin(m * s + k * np.pi / 2)
                    )
            r *= self.radius
            cos_d = np.zeros_like(r)
            sin_d = np.zeros_like(r)
            for k in range(order + 1):
                cos_d[k] = np.cos(s + k * np.pi / 2)
                sin_d[k] = np.sin(s + k * np.pi / 2)
            from math import comb

            for k in range(order + 1):
                for i in range(k + 1):
                    out[k, ..., 0] += comb(k, i) * r[i] * cos_d[k - i]
                    out[k, ..., 1] += comb(k, i) * r[i] * sin_d[k - i]
        else:  # local-graph
            a2, a4, a5, a6 = self.coeffs
            poly = np.array([0.0, 0.0, a2, 0.0, a4, a5, a6])
            for k in range(order + 1):
                dp = poly.copy()
                for _ in range(k):
                    dp = dp[1:] * np.arange(1, dp.size)
                y = np.polyval(dp[::-1], s) if dp.size else np.zeros_like(s)
                if k == 0:
                    out[k, ..., 0] = s
                elif k == 1:
                    out[k, ..., 0] = 1.0
                out[k, ..., 1] = y
            ca, sa = np.cos(self.pose_angle), np.sin(self.pose_angle)
            rot = np.array([[ca, -sa], [sa, ca]])
            out = out @ rot.T
            out[0] += np.asarray(self.pose_offset)
        return out

    def point(self, s):
        return self.derivatives(s, 0)[0]


def curve_frame(curve, s):
    """Point, unit tangent, +90-degree normal, and signed curvature at s."""
    d = curve.derivatives(s, 2)
    g, g1, g2 = d[0], d[1], d[2]
    speed = np.linalg.norm(g1, axis=-1)
    t = g1 / speed[..., None]
    normal = np.stack([-t[..., 1], t[..., 0]], axis=-1)
    cross = g1[..., 0] * g2[..., 1] - g1[..., 1] * g2[..., 0]
    kappa = cross / speed**3
    return g, t, normal, kappa


def curvature_derivative(curve, s):
    """d(kappa)/ds, exact from order-3 derivatives (not arclength)."""
    d = curve.derivatives(s, 3)
    g1, g2, g3 = d[1], d[2], d[3]
    speed2 = np.sum(g1 * g1, axis=-1)
    cross12 = g1[..., 0] * g2[..., 1] - g1[..., 1] * g2[..., 0]
    cross13 = g1[..., 0] * g3[..., 1] - g1[..., 1] * g3[..., 0]
    dot12 = np.sum(g1 * g2, axis=-1)
    return (cross13 * speed2 - 3.0 * cross12 * dot12) / speed2**2.5


@dataclass(frozen=True)
class LocalVertexModel:
    """Curve jet y = a2 x^2 + a4 x^4 + a5 x^5 + a6 x^6 at a vertex (a2 != 0)."""

    a2: float
    a4: float = 0.0
    a5: float = 0.0
    a6: float = 0.0

    def __post_init__(self):
        if self.a2 == 0.0:
            raise ValueError("vertex model requires a2 != 0")


class VertexClass(Enum):
    A3 = "A3"
    A4 = "A4"
    A5 = "A5"
    BEYOND_A5 = "BeyondA5"


class DiagonalStructure(Enum):
    TRANSVERSE_BRANCH = "TransverseBranch"
    ISOLATED_POINT = "IsolatedPoint"


# Scale-invariant relative tolerance: under x -> lambda x, y -> lambda y the
# decision quantities a2^3 - a4, a5, 2 a2^5 - a6 pick up pure powers of lambda.
_REL_TOL = 1e-12


def _iszero(value, scale):
    return abs(value) <= _REL_TOL * scale


def vertex_classify(m):
    """Contact class of the curvature circle at the vertex: A3/A4/A5/BeyondA5."""
    s3 = abs(m.a2) ** 3 + abs(m.a4)
    if not _iszero(m.a2**3 - m.a4, s3):
        return VertexClass.A3
    if not _iszero(m.a5, abs(m.a2) ** 4 + abs(m.a5)):
        return VertexClass.A4
    s5 = abs(m.a2) ** 5 + abs(m.a6)
    if not _iszero(2.0 * m.a2**5 - m.a6, s5):
        return VertexClass.A5
    return VertexClass.BEYOND_A5


@dataclass(frozen=True)
class DiagonalReport:
    structure: DiagonalStructure
    vertex_class: VertexClass
    # branch direction in (s, t): for odd contact the off-diagonal branch
    # leaves along s + t = 0
    branch_direction: tuple = field(default=None)


def diagonal_structure(m):
    """Local structure of the pre-symmetry set on the diagonal at the vertex."""
    cls = vertex_classify(m)
    if cls is VertexClass.BEYOND_A5:
        raise UnsupportedDegeneracyError("contact beyond A5 at the vertex")
    if cls is VertexClass.A4:
        return DiagonalReport(DiagonalStructure.ISOLATED_POINT, cls)
    return DiagonalReport(
        DiagonalStructure.TRANSVERSE_BRANCH, cls, branch_direction=(1.0, -1.0)
    )
