import numpy as np
import pytest

from presymset.errors import UnsupportedDegeneracyError
from presymset.geometry2d import (
    DiagonalStructure,
    LocalVertexModel,
    PlaneCurve,
    VertexClass,
    curvature_derivative,
    curve_frame,
    diagonal_structure,
    vertex_classify,
)

ELLIPSE = PlaneCurve("ellipse", a=2.0, b=1.0)
WOBBLE = PlaneCurve(
    "perturbed-circle", radius=1.0, cos_amps=(0.0, 0.12, 0.05), sin_amps=(0.0, 0.0, 0.03)
)
GRAPH = PlaneCurve("local-graph", coeffs=(1.0, -0.3, 0.2, 0.0),
                   pose_angle=0.4, pose_offset=(1.0, -2.0))


def test_unit_circle_frame():
    circ = PlaneCurve("perturbed-circle", radius=1.0)
    p, t, n, k = curve_frame(circ, 0.0)
    assert np.allclose(p, [1.0, 0.0])
    assert np.allclose(t, [0.0, 1.0])
    assert np.allclose(n, [-1.0, 0.0])
    assert k == pytest.approx(1.0)


def test_ellipse_curvature_closed_form():
    # kappa = a b / (a^2 sin^2 s + b^2 cos^2 s)^(3/2)
    a, b = 2.0, 1.0
    for s in np.linspace(0, 2 * np.pi, 17):
        *_, k = curve_frame(ELLIPSE, s)
        expect = a * b / (a**2 * np.sin(s) ** 2 + b**2 * np.cos(s) ** 2) ** 1.5
        assert k == pytest.approx(expect, rel=1e-12)
    assert curve_frame(ELLIPSE, 0.0)[3] == pytest.approx(2.0)


def test_local_graph_curvature_at_origin():
    flat = PlaneCurve("local-graph", coeffs=(1.0, 0.0, 0.0, 0.0))
    *_, k = curve_frame(flat, 0.0)
    assert k == pytest.approx(2.0)  # f''(0) for y = x^2


@pytest.mark.parametrize("curve", [ELLIPSE, WOBBLE, GRAPH])
def test_tangent_unit_and_fd_consistency(curve):
    lo, hi = curve.domain()
    ss = np.linspace(lo + 0.05, hi - 0.05, 25)
    h = 1e-5
    for s in ss:
        p, t, n, k = curve_frame(curve, s)
        assert abs(np.linalg.norm(t) - 1.0) < 1e-12
        assert np.dot(t, n) == pytest.approx(0.0, abs=1e-14)
        fd = (curve.point(s + h) - curve.point(s - h)) / (2 * h)
        fd /= np.linalg.norm(fd)
        assert np.linalg.norm(fd - t) < 1e-8


@pytest.mark.parametrize("curve", [ELLIPSE, WOBBLE, GRAPH])
@pytest.mark.parametrize("order", [1, 2, 3, 4, 5, 6])
def test_higher_derivatives_match_finite_differences(curve, order):
    lo, hi = curve.domain()
    s0 = 0.37 * (hi - lo) + lo
    d = curve.derivatives(s0, order)[order]
    h = 0.05
    offsets = np.arange(-5, 6)
    vals = np.stack([curve.point(s0 + i * h) for i in offsets])
    # fit in integer offsets (well conditioned), rescale coefficients by h^k
    coeff = np.polyfit(offsets.astype(float), vals, 10)
    from math import factorial

    est = coeff[10 - order] * factorial(order) / h**order
    assert np.linalg.norm(est - d) < 1e-4 * max(1.0, np.linalg.norm(d))


def test_curvature_derivative_fd():
    for curve in (ELLIPSE, WOBBLE):
        for s in (0.3, 1.2, 4.0):
            h = 1e-5
            km = curve_frame(curve, s - h)[3]
            kp = curve_frame(curve, s + h)[3]
            assert curvature_derivative(curve, s) == pytest.approx(
                (kp - km) / (2 * h), abs=1e-7
            )


def test_vertex_classify_table():
    assert vertex_classify(LocalVertexModel(1, 0, 0, 0)) is VertexClass.A3
    assert vertex_classify(LocalVertexModel(1, 1, 1, 0)) is VertexClass.A4
    assert vertex_classify(LocalVertexModel(1, 1, 0, 1)) is VertexClass.A5
    assert vertex_classify(LocalVertexModel(1, 1, 0, 2)) is VertexClass.BEYOND_A5


def test_vertex_classify_scale_invariance():
    rng = np.random.RandomState(7)
    for _ in range(200):
        a2 = rng.uniform(0.2, 2.0) * rng.choice([-1.0, 1.0])
        a4, a5, a6 = rng.uniform(-2, 2, size=3)
        if rng.rand() < 0.3:
            a4 = a2**3  # boundary: exact A4 family
        if rng.rand() < 0.3:
            a5 = 0.0
        m = LocalVertexModel(a2, a4, a5, a6)
        base = vertex_classify(m)
        for lam in (0.5, 2.0, 7.5):
            scaled = LocalVertexModel(
                lam * a2, lam**3 * a4, lam**4 * a5, lam**5 * a6
            )
            assert vertex_classify(scaled) is base


def test_diagonal_structure():
    rep = diagonal_structure(LocalVertexModel(1, 0, 0, 0))
    assert rep.structure is DiagonalStructure.TRANSVERSE_BRANCH
    assert rep.branch_direction == (1.0, -1.0)
    assert (
        diagonal_structure(LocalVertexModel(1, 1, 1, 0)).structure
        is DiagonalStructure.ISOLATED_POINT
    )
    assert (
        diagonal_structure(LocalVertexModel(1, 1, 0, 1)).structure
        is DiagonalStructure.TRANSVERSE_BRANCH
    )
    with pytest.raises(UnsupportedDegeneracyError):
        diagonal_structure(LocalVertexModel(1, 1, 0, 2))


def test_a4_never_transverse():
    # even-contact vertices always give an isolated point
    rng = np.random.RandomState(3)
    for _ in range(100):
        a2 = rng.uniform(0.2, 1.5)
        a5 = rng.uniform(0.1, 2.0)
        rep = diagonal_structure(LocalVertexModel(a2, a2**3, a5, rng.randn()))
        assert rep.structure is DiagonalStructure.ISOLATED_POINT
