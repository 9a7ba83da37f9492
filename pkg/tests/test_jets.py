import numpy as np
import pytest

from presymset.jets import Jet2, compose, eval_along, vcross, vdot, vnormalize


def taylor_fd(f, order, h=1e-2):
    """Finite-difference Taylor coefficients of f(x, y) at 0 (crude oracle)."""
    # only used for low orders where FD is trustworthy
    c = np.zeros((order + 1, order + 1))
    for i in range(order + 1):
        for j in range(order + 1 - i):
            # central differences via polynomial fit on a small grid
            xs = np.arange(-order, order + 1) * h
            vals = np.array([[f(x, y) for y in xs] for x in xs])
            # 2D polyfit
            A = []
            for p in range(order + 1):
                for q in range(order + 1 - p):
                    A.append(np.outer(xs**p, xs**q).ravel())
            A = np.array(A).T
            sol, *_ = np.linalg.lstsq(A, vals.ravel(), rcond=None)
            k = 0
            for p in range(order + 1):
                for q in range(order + 1 - p):
                    c[p, q] = sol[k]
                    k += 1
            return c
    return c


def test_mul_matches_poly_product():
    a = Jet2.from_terms({(0, 0): 2.0, (1, 0): 3.0, (0, 1): -1.0, (1, 1): 0.5}, 4)
    b = Jet2.from_terms({(0, 0): 1.0, (2, 0): 4.0}, 4)
    p = a * b
    assert p.coeff(0, 0) == 2.0
    assert p.coeff(2, 0) == 8.0
    assert p.coeff(3, 0) == 12.0
    assert p.coeff(2, 1) == -4.0
    assert p.coeff(3, 1) == 2.0


def test_truncation_drops_high_order():
    x = Jet2.variable("x", 3)
    p = x**3 * x  # degree 4 truncates away at order 3
    assert np.all(p.c == 0.0)


def test_inverse_and_sqrt_roundtrip():
    a = Jet2.from_terms({(0, 0): 4.0, (1, 0): 1.0, (0, 1): -2.0, (2, 1): 0.3}, 6)
    inv = a.inverse()
    prod = a * inv
    expect = np.zeros_like(prod.c)
    expect[0, 0] = 1.0
    assert np.allclose(prod.c, expect, atol=1e-13)
    s = a.sqrt()
    assert np.allclose((s * s).c, a.c, atol=1e-12)


def test_derivatives():
    f = Jet2.from_terms({(2, 1): 5.0, (0, 3): 1.0}, 4)
    fx = f.dx()
    fy = f.dy()
    assert fx.coeff(1, 1) == 10.0
    assert fy.coeff(2, 0) == 5.0
    assert fy.coeff(0, 2) == 3.0
    assert f.partial(2, 1) == pytest.approx(5.0 * 2.0)


def test_compose_against_direct_expansion():
    # f(x,y) = x^2 + x y, substitute x <- u + u v, y <- v^2
    f = Jet2.from_terms({(2, 0): 1.0, (1, 1): 1.0}, 4)
    u = Jet2.variable("x", 4)
    v = Jet2.variable("y", 4)
    g = compose(f, u + u * v, v * v)
    # (u + uv)^2 + (u + uv) v^2 = u^2 + 2u^2 v + u^2 v^2 + u v^2 + u v^3
    assert g.coeff(2, 0) == pytest.approx(1.0)
    assert g.coeff(2, 1) == pytest.approx(2.0)
    assert g.coeff(2, 2) == pytest.approx(1.0)
    assert g.coeff(1, 2) == pytest.approx(1.0)
    assert g.coeff(1, 3) == pytest.approx(1.0)


def test_eval_along_curve():
    # f = x^2 - y along (t, 3t^2): f = t^2 - 3t^2 = -2 t^2
    f = Jet2.from_terms({(2, 0): 1.0, (0, 1): -1.0}, 4)
    coeffs = eval_along(f, [0.0, 1.0], [0.0, 0.0, 3.0])
    assert np.allclose(coeffs, [0.0, 0.0, -2.0, 0.0, 0.0])


def test_vector_helpers_unit_normal():
    # normal of the graph z = (x^2 + 2 y^2)/2 has the exact Monge form jets
    order = 3
    fx = Jet2.from_terms({(1, 0): 1.0}, order)
    fy = Jet2.from_terms({(0, 1): 2.0}, order)
    h = [-fx, -fy, Jet2.constant(1.0, order)]
    n = vnormalize(h)
    assert vdot(n, n).value() == pytest.approx(1.0)
    # d n / dx at origin = (-kappa1, 0, 0)
    assert n[0].partial(1, 0) == pytest.approx(-1.0)
    assert n[1].partial(0, 1) == pytest.approx(-2.0)
    assert n[2].partial(1, 0) == pytest.approx(0.0)
    c = vcross([Jet2.constant(1, 1), Jet2.constant(0, 1), Jet2.constant(0, 1)],
               [Jet2.constant(0, 1), Jet2.constant(1, 1), Jet2.constant(0, 1)])
    assert c[2].value() == pytest.approx(1.0)
