import numpy as np
import pytest

from conftest import (
    scene_a1a1,
    scene_a2a1,
    scene_a3a1_generic,
    scene_a3a1_transitional,
)
from presymset.errors import (
    ContactMismatchError,
    SingularJacobianError,
    StationarityFailureError,
)
from presymset.geometry3d import (
    EmbeddedPatch,
    MongePatch,
    RigidMotion,
    SceneSpec,
    Sphere,
    BitangentScene,
    construct_scene,
    contact_type,
)
from presymset.presym3d_offdiag import (
    count_preimages,
    cusp_points,
    derivative_identities_check,
    fold_targets,
    implicit_derivatives,
    jacobian_columns,
    lips_beaks_discriminant,
    residual_G,
    residual_jacobian_fd,
    solve_field,
    solve_second_contact,
    transitional_a3a1_test,
)


def test_residual_zero_at_base():
    sc = scene_a1a1()
    r0 = sc.sphere.radius
    assert np.linalg.norm(residual_G(sc, 0, 0, 0, 0, r0)) < 1e-12


def test_residual_linear_in_radius():
    sc = scene_a1a1()
    r0 = sc.sphere.radius
    m = sc.patch_m.normal(0, 0)
    n = sc.patch_n.normal(0, 0)
    g = residual_G(sc, 0, 0, 0, 0, r0 + 0.1)
    assert np.allclose(g, 0.1 * (m - n), atol=1e-12)
    assert np.linalg.norm(g) == pytest.approx(0.1 * np.linalg.norm(m - n), abs=1e-12)


def test_residual_seed_direction_regression():
    sc = scene_a1a1()
    g = residual_G(sc, 0.01, 0.0, 0.0, 0.0, sc.sphere.radius)
    # frozen from direct evaluation; the leading term is (1 - r kappa1) e1 * s
    assert g[0] == pytest.approx(0.002939775971593339, abs=1e-12)
    lead = (1.0 - sc.sphere.radius * 0.7) * 0.01
    assert g[0] == pytest.approx(lead, abs=1e-4)


def test_jacobian_columns_structure():
    sc = scene_a2a1()
    cols = jacobian_columns(sc)
    assert np.linalg.norm(cols[0]) < 1e-12  # (1 - r kappa1) e1 = 0 at A2
    sc1 = scene_a1a1()
    cols = jacobian_columns(sc1)
    for c in cols:
        assert np.linalg.norm(c) > 1e-3
    p = sc1.patch_m.point(0, 0)
    q = sc1.patch_n.point(0, 0)
    chord = p - q
    cross = np.cross(cols[4], chord)
    assert np.linalg.norm(cross) < 1e-10 * np.linalg.norm(chord)


def test_jacobian_columns_match_finite_differences():
    rng = np.random.RandomState(0)
    for _ in range(10):
        spec = SceneSpec(
            contact_m="A1",
            m_kappa1=rng.uniform(0.3, 0.8), m_kappa2=rng.uniform(1.3, 2.2),
            m_cubic=tuple(rng.uniform(-0.5, 0.5, 4)),
            m_quartic=tuple(rng.uniform(-0.3, 0.3, 5)),
            n_kappa1=rng.uniform(-0.5, -0.1), n_kappa2=rng.uniform(0.2, 0.6),
            n_cubic=tuple(rng.uniform(-0.3, 0.3, 4)),
            chord_angle=rng.uniform(0.5, 2.4), chord_azimuth=rng.uniform(-2, 2),
        )
        sc = construct_scene(spec)
        base = (0.0, 0.0, 0.0, 0.0, sc.sphere.radius)
        cols = jacobian_columns(sc, base)
        fd = residual_jacobian_fd(sc, base)
        for c, f in zip(cols, fd):
            assert np.linalg.norm(np.asarray(c) - f) < 1e-6


def test_solve_second_contact_base_and_uniqueness():
    sc = scene_a1a1()
    r0 = sc.sphere.radius
    u, v, r = solve_second_contact(sc, 0.0, 0.0)
    assert abs(u) < 1e-12 and abs(v) < 1e-12 and abs(r - r0) < 1e-12
    # graph property: random seeds within the basin return the same solution
    rng = np.random.RandomState(3)
    ref = solve_second_contact(sc, 0.04, -0.03)
    for _ in range(5):
        seed = (ref[0] + rng.uniform(-0.02, 0.02), ref[1] + rng.uniform(-0.02, 0.02),
                ref[2] + rng.uniform(-0.05, 0.05))
        got = solve_second_contact(sc, 0.04, -0.03, seed)
        assert np.allclose(got, ref, atol=1e-8)


def test_solve_singular_jacobian_when_second_contact_a2():
    # A2 at the second patch violates the implicit-function hypothesis
    m = MongePatch(0.7, 1.9, (0.2, 0.1, -0.3, 0.15))
    n = MongePatch(1.0, 0.55, (0.5, 0.1, 0.0, 0.0))  # lambda1 = 1/r0
    emb_m = EmbeddedPatch(m, RigidMotion.identity())
    theta = 1.1
    omega = np.array([np.sin(theta), 0.0, -np.cos(theta)])
    q0 = np.array([0.0, 0.0, 1.0]) + omega
    n0 = -omega
    f1 = np.array([np.cos(theta), 0.0, np.sin(theta)])
    R = np.column_stack([f1, np.cross(n0, f1), n0])
    emb_n = EmbeddedPatch(n, RigidMotion(R, q0))
    sphere = Sphere([0.0, 0.0, 1.0], 1.0)
    sc = BitangentScene(emb_m, sphere, contact_type(emb_m, sphere).klass,
                        emb_n, contact_type(emb_n, sphere).klass)
    with pytest.raises(SingularJacobianError):
        solve_second_contact(sc, 0.0, 0.0)


def test_chord_parallelism_at_samples():
    sc = scene_a1a1()
    rng = np.random.RandomState(1)
    for _ in range(10):
        s, t = rng.uniform(-0.08, 0.08, 2)
        u, v, r = solve_second_contact(sc, s, t)
        p = sc.patch_m.point(s, t)
        q = sc.patch_n.point(u, v)
        m = sc.patch_m.normal(s, t)
        n = sc.patch_n.normal(u, v)
        chord = p - q
        w = m - n
        angle = np.linalg.norm(np.cross(chord, w)) / (
            np.linalg.norm(chord) * np.linalg.norm(w)
        )
        assert angle < 1e-8


def test_implicit_derivatives_match_field_differences():
    # finer grid than the fold fixture: the 5-point truncation must sit
    # below the 1e-5 consistency bound
    field = solve_field(scene_a2a1(), n=6, half_width=0.042)
    i0, j0 = field.base_index
    h = field.s_axis[1] - field.s_axis[0]
    # 5-point stencil along s of U against stored u_s
    for key, arr in (("u_s", field.U), ("v_s", field.V), ("r_s", field.R)):
        fd = (
            arr[i0 - 2, j0] - 8 * arr[i0 - 1, j0] + 8 * arr[i0 + 1, j0] - arr[i0 + 2, j0]
        ) / (12 * h)
        assert abs(fd - field.first[key][i0, j0]) < 1e-5
    for key, arr in (("u_t", field.U), ("r_t", field.R)):
        fd = (
            arr[i0, j0 - 2] - 8 * arr[i0, j0 - 1] + 8 * arr[i0, j0 + 1] - arr[i0, j0 + 2]
        ) / (12 * h)
        assert abs(fd - field.first[key][i0, j0]) < 1e-5
    fd_ss = (
        -field.U[i0 + 2, j0] + 16 * field.U[i0 + 1, j0] - 30 * field.U[i0, j0]
        + 16 * field.U[i0 - 1, j0] - field.U[i0 - 2, j0]
    ) / (12 * h * h)
    assert abs(fd_ss - field.second["u_ss"][i0, j0]) < 1e-5


def test_a2a1_identities():
    rep = derivative_identities_check(scene_a2a1())
    assert abs(rep["u_s"]) < 1e-6
    assert abs(rep["v_s"]) < 1e-6
    assert abs(rep["r_s"]) < 1e-6
    assert rep["r_t_defect"] < 1e-6


def test_a3a1_second_order_identities():
    rep = derivative_identities_check(scene_a3a1_generic())
    assert abs(rep["r_ss"]) < 1e-5
    assert abs(rep["u_ss"]) < 1e-5
    assert abs(rep["v_ss"]) < 1e-5


def test_identities_contact_mismatch():
    with pytest.raises(ContactMismatchError):
        derivative_identities_check(scene_a1a1())


def test_transitional_test_generic_vs_transitional():
    rep = transitional_a3a1_test(scene_a3a1_generic())
    assert not rep["transitional"]
    assert abs(rep["delta"]) > 1e-3
    rep2 = transitional_a3a1_test(scene_a3a1_transitional(0.0))
    assert rep2["transitional"]
    assert abs(rep2["delta"]) < 1e-8
    assert rep2["plane_distance"] < 1e-8
    with pytest.raises(ContactMismatchError):
        transitional_a3a1_test(scene_a2a1())


def test_transitional_routes_agree_with_nonzero_b1():
    # q0 solved into the osculating plane even when the curvature line bends
    sc = construct_scene(SceneSpec(
        contact_m="A3", m_cubic=(0.0, 0.35, 0.5, 0.2),
        m_quartic=(0.1, 0.3, 0.0, 0.15, 0.1), m_quintic=(0.2, 0, 0, 0, 0, 0),
        n_cubic=(0.1, -0.05, 0.2, 0.08), chord_angle=1.1, transitional=True,
    ))
    rep = transitional_a3a1_test(sc)
    assert rep["transitional"]
    assert rep["plane_distance"] < 1e-9
    assert abs(sc.meta["chord_azimuth"]) > 1e-3  # nontrivial azimuth


def test_lips_beaks_sides():
    lips = lips_beaks_discriminant(scene_a3a1_transitional(0.0))
    assert lips["side"] == "LipsSide"
    assert lips["det_hess"] > 1e-3
    beaks = lips_beaks_discriminant(scene_a3a1_transitional(0.6))
    assert beaks["side"] == "BeaksSide"
    assert beaks["det_hess"] < -1e-3
    with pytest.raises(StationarityFailureError):
        lips_beaks_discriminant(scene_a3a1_generic())


def test_fold_two_preimage_counts(a2a1_field):
    sc = a2a1_field.scene
    two, zero = fold_targets(a2a1_field, count=20)
    assert len(two) >= 15
    for tgt in two:
        assert len(count_preimages(sc, tgt, a2a1_field)) == 2
    for tgt in zero:
        assert len(count_preimages(sc, tgt, a2a1_field)) == 0


def test_cusp_point_at_generic_a3a1_base():
    field = solve_field(scene_a3a1_generic(), n=8, half_width=0.1)
    cps = cusp_points(field)
    assert len(cps) == 1
    assert np.hypot(*cps[0]) < 5e-3


def test_frame_covariance_of_solutions():
    sc = scene_a1a1()
    rng = np.random.RandomState(7)
    ref = solve_second_contact(sc, 0.03, -0.02)
    for _ in range(3):
        g = RigidMotion.from_axis_angle(rng.randn(3), rng.uniform(0, np.pi), rng.randn(3))
        sc2 = BitangentScene(
            EmbeddedPatch(sc.patch_m.patch, g.compose(sc.patch_m.motion)),
            Sphere(g.apply_point(sc.sphere.center), sc.sphere.radius),
            sc.contact_m,
            EmbeddedPatch(sc.patch_n.patch, g.compose(sc.patch_n.motion)),
            sc.contact_n,
        )
        got = solve_second_contact(sc2, 0.03, -0.02)
        assert np.allclose(got, ref, atol=1e-9)
