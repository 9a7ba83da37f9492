import numpy as np
import pytest

from presymset.errors import UmbilicPointError, UnrealizableSpecError
from presymset.geometry3d import (
    ContactClass,
    EmbeddedPatch,
    MongePatch,
    RigidMotion,
    SceneSpec,
    Sphere,
    construct_scene,
    contact_type,
    curvature_sphere_scene,
    eq9_numerator,
    principal_data,
    t02_numerator,
)

A3_PATCH = MongePatch(1.0, 2.0, cubic=(0.0, 1.0, 1.0, 0.0), quartic=(0.0, 1.0, 0.0, 0.0, 0.0))
A4_PATCH = MongePatch(
    1.0, 2.0, cubic=(0.0, 1.0, 1.0, 0.0), quartic=(5 / 8, 1.0, 0.0, 0.0, 0.0),
    quintic=(1.0, 0.0, 0.0, 0.0, 0.0, 0.0),
)


def embed(patch):
    return EmbeddedPatch(patch, RigidMotion.identity())


def random_motion(rng):
    axis = rng.randn(3)
    return RigidMotion.from_axis_angle(axis, rng.uniform(0, np.pi), rng.randn(3))


def test_rigid_motion_validation():
    with pytest.raises(ValueError):
        RigidMotion(np.diag([1.0, 1.0, -1.0]), np.zeros(3))  # reflection
    m = RigidMotion.from_axis_angle([0, 0, 1], 0.3, [1, 2, 3])
    p = np.array([1.0, 0.0, 0.0])
    assert np.allclose(m.inverse_point(m.apply_point(p)), p, atol=1e-14)


def test_principal_data_origin():
    pd = principal_data(embed(MongePatch(1.0, 2.0, cubic=(1.0, 0, 0, 0))), 0.0, 0.0)
    assert pd.kappa1 == pytest.approx(1.0)
    assert pd.kappa2 == pytest.approx(2.0)
    assert np.allclose(pd.e1, [1, 0, 0])
    assert np.allclose(pd.e2, [0, 1, 0])
    assert pd.kappa1_s == pytest.approx(6.0)  # 6 b0
    assert pd.kappa1_t == pytest.approx(0.0)  # 2 b1


def test_principal_data_rejects_umbilic():
    with pytest.raises(UmbilicPointError):
        MongePatch(0.5, 0.5)  # sphere-like patch


def test_shape_operator_eigen_relation():
    rng = np.random.RandomState(1)
    patch = MongePatch(0.8, 1.7, cubic=(0.2, -0.4, 0.3, 0.1),
                       quartic=(0.1, 0.2, -0.1, 0.05, 0.3))
    emb = EmbeddedPatch(patch, random_motion(rng))
    for x, y in [(0.0, 0.0), (0.1, -0.2), (-0.15, 0.05)]:
        pd = principal_data(emb, x, y)
        assert abs(pd.e1 @ pd.e2) < 1e-9
        assert abs(pd.e1 @ pd.normal) < 1e-9
        assert abs(np.linalg.norm(pd.e1) - 1) < 1e-12
        # shape operator via normal differentiation: dN(e_i) = -kappa_i e_i
        h = 1e-6
        # move along e1 in parameter space: project onto the parameter plane
        for e, k in ((pd.e1, pd.kappa1), (pd.e2, pd.kappa2)):
            el = emb.motion.rotation.T @ e
            f = patch.height_jet(x, y, 1)
            px = np.array([1.0, 0.0, f.dx().value()])
            py = np.array([0.0, 1.0, f.dy().value()])
            I = np.array([[px @ px, px @ py], [px @ py, py @ py]])
            xi = np.linalg.solve(I, np.array([px @ el, py @ el]))
            n_p = emb.normal(x + h * xi[0], y + h * xi[1])
            n_m = emb.normal(x - h * xi[0], y - h * xi[1])
            dn = (n_p - n_m) / (2 * h)
            assert np.linalg.norm(dn + k * e) < 1e-5


def test_curvature_derivatives_match_finite_differences():
    patch = MongePatch(0.9, 1.8, cubic=(0.3, 0.5, -0.2, 0.4),
                       quartic=(0.2, -0.1, 0.3, 0.0, 0.1))
    emb = embed(patch)
    h = 1e-4
    for x, y in [(0.0, 0.0), (0.12, -0.07)]:
        pd = principal_data(emb, x, y)
        # 5-point stencil along each principal direction in parameter space
        f = patch.height_jet(x, y, 1)
        px = np.array([1.0, 0.0, f.dx().value()])
        py = np.array([0.0, 1.0, f.dy().value()])
        I = np.array([[px @ px, px @ py], [px @ py, py @ py]])
        for e, val in ((pd.e1, pd.kappa1_s), (pd.e2, pd.kappa1_t)):
            xi = np.linalg.solve(I, np.array([px @ e, py @ e]))
            ks = [
                principal_data(emb, x + k * h * xi[0], y + k * h * xi[1]).kappa1
                for k in (-2, -1, 1, 2)
            ]
            fd = (ks[0] - 8 * ks[1] + 8 * ks[2] - ks[3]) / (12 * h)
            assert abs(fd - val) < 1e-6


@pytest.mark.parametrize(
    "radius,expect",
    [(0.7, ContactClass.A1), (0.45, ContactClass.A1), (1.0, ContactClass.A2)],
)
def test_contact_type_radius_table(radius, expect):
    patch = MongePatch(1.0, 2.0, cubic=(0.5, 0, 0, 0))
    rep = contact_type(embed(patch), Sphere([0, 0, radius], radius))
    assert rep.klass is expect


def test_contact_type_not_tangent():
    patch = MongePatch(1.0, 2.0)
    rep = contact_type(embed(patch), Sphere([0.2, 0, 1.0], 1.0))
    assert rep.klass is ContactClass.NOT_TANGENT


def test_contact_a3_example_margin():
    rep = contact_type(embed(A3_PATCH), Sphere([0, 0, 1.0], 1.0))
    assert rep.klass is ContactClass.A3
    assert rep.margins["eq9_numerator"] == pytest.approx(5.0)
    # jet route quartic = -eq9num / (4 kappa1 (kappa1 - kappa2)) = 5/4
    assert rep.margins["reduced_quartic"] == pytest.approx(1.25)


def test_contact_a4_a5_gates():
    rep4 = contact_type(embed(A4_PATCH), Sphere([0, 0, 1.0], 1.0))
    assert rep4.klass is ContactClass.A4
    assert rep4.margins["eq9_numerator"] == pytest.approx(0.0, abs=1e-14)
    assert rep4.margins["t02_numerator"] == pytest.approx(3.0)
    d0 = 0.0  # b1 c1 (k1-k2) + b1^2 b2 = 0 for these coefficients
    p5 = MongePatch(1.0, 2.0, cubic=(0.0, 1.0, 1.0, 0.0),
                    quartic=(5 / 8, 1.0, 0, 0, 0), quintic=(d0, 0, 0, 0, 0, 0))
    rep5 = contact_type(embed(p5), Sphere([0, 0, 1.0], 1.0))
    assert rep5.klass is ContactClass.A5
    assert abs(t02_numerator(p5)) < 1e-14


def test_contact_jet_route_matches_coefficient_gates():
    rng = np.random.RandomState(42)
    for _ in range(25):
        k1 = rng.uniform(0.6, 1.5)
        k2 = k1 + rng.choice([-1, 1]) * rng.uniform(0.4, 1.2)
        p = MongePatch(
            k1, k2, (0.0, *(rng.randn(3) * 0.4)), tuple(rng.randn(5) * 0.3),
            tuple(rng.randn(6) * 0.3),
        )
        rep = contact_type(embed(p), Sphere([0, 0, 1 / k1], 1 / k1))
        pred = -eq9_numerator(p) / (4 * k1 * (k1 - k2))
        assert rep.margins["reduced_quartic"] == pytest.approx(pred, abs=1e-12)
        assert rep.klass in (ContactClass.A3, ContactClass.A4)


def test_contact_kernel_on_second_axis():
    # sphere matching 1/kappa2: the kernel lies along y and roles swap
    patch = MongePatch(2.0, 1.0, cubic=(0.0, 0.0, 1.0, 0.3))
    rep = contact_type(embed(patch), Sphere([0, 0, 1.0], 1.0))
    assert rep.axis == "y"
    assert rep.klass is ContactClass.A2  # b3 = 0.3 plays the cubic role


def test_construct_scene_roundtrip():
    rng = np.random.RandomState(5)
    for cm in ("A1", "A2", "A3", "A4"):
        spec = SceneSpec(
            contact_m=cm,
            m_cubic=(0.5, 0.3, -0.2, 0.1) if cm == "A2" else (0.0, 0.6, 0.4, 0.1),
            m_quartic=(0.1, 0.3, -0.2, 0.15, 0.1),
            m_quintic=(0.2, 0, 0, 0, 0, 0),
            chord_angle=rng.uniform(0.6, 2.2),
            chord_azimuth=rng.uniform(-1.0, 1.0),
        )
        scene = construct_scene(spec)
        assert scene.contact_m.value == cm
        assert scene.contact_n is ContactClass.A1
        scene.validate(tol=1e-10)


def test_construct_scene_rejects_bad_requests():
    with pytest.raises(UnrealizableSpecError):
        construct_scene(SceneSpec(contact_m="A2", m_cubic=(0.0, 0, 0, 0)))
    with pytest.raises(UnrealizableSpecError):
        construct_scene(SceneSpec(contact_m="A1", m_kappa1=1.0))  # r0 = 1/kappa1
    with pytest.raises(UnrealizableSpecError):
        construct_scene(SceneSpec(contact_m="A3", chord_angle=3.5))


def test_frame_covariance_of_contact_type():
    rng = np.random.RandomState(11)
    scene = construct_scene(SceneSpec(contact_m="A2", m_cubic=(0.5, 0.3, -0.2, 0.1)))
    for _ in range(5):
        g = random_motion(rng)
        emb = EmbeddedPatch(scene.patch_m.patch, g.compose(scene.patch_m.motion))
        sph = Sphere(g.apply_point(scene.sphere.center), scene.sphere.radius)
        rep = contact_type(emb, sph)
        assert rep.klass is ContactClass.A2
        base = contact_type(scene.patch_m, scene.sphere)
        for key in ("one_minus_r_kappa1", "reduced_cubic"):
            assert rep.margins[key] == pytest.approx(base.margins[key], abs=1e-9)


def test_curvature_sphere_scene():
    scene = curvature_sphere_scene(A3_PATCH)
    assert scene.on_diagonal
    assert scene.contact_m is ContactClass.A3
    assert scene.sphere.radius == pytest.approx(1.0)
