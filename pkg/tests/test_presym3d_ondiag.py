import numpy as np
import pytest

from conftest import A3_PATCH, A4_PATCH, A5_PATCH
from presymset.errors import (
    ExceptionalRidgeDirectionError,
    SingularRidgeError,
    TrivialBranchError,
)
from presymset.geometry3d import MongePatch, principal_data
from presymset.presym3d_ondiag import (
    diagonal_limit_radii,
    fold_preimages_1d,
    ondiag_classify,
    predicted_coeffs,
    series_fit,
    solve_ondiag,
    stencil_nodes,
    symmetry_check,
)


def test_predicted_alpha_worked_value():
    # numerator 5/4, denominator -1 for the A3 example patch
    assert predicted_coeffs(A3_PATCH, "A3")["alpha"] == pytest.approx(-1.25)


def test_predicted_a4_worked_values():
    pred = predicted_coeffs(A4_PATCH, "A4")
    assert pred["t20"] == pytest.approx(2.0)
    assert pred["t11"] == pytest.approx(4.0)
    assert pred["t02"] == pytest.approx(3.0)


def test_predicted_exceptional_cases():
    # c1 (kappa2 - kappa1) - 2 b1 b2 = 1 - 2*(1/2) = 0
    patch = MongePatch(1.0, 2.0, cubic=(0.0, 1.0, 0.5, 0.0),
                       quartic=(0.0, 1.0, 0, 0, 0))
    with pytest.raises(ExceptionalRidgeDirectionError):
        predicted_coeffs(patch, "A3")
    with pytest.raises(SingularRidgeError):
        predicted_coeffs(patch, "A4")


def test_solve_rejects_diagonal():
    from conftest import A3_PATCH
    from presymset.geometry3d import curvature_sphere_scene

    scene = curvature_sphere_scene(A3_PATCH)
    with pytest.raises(TrivialBranchError):
        solve_ondiag(scene, 0.01, 0.01)


def test_solve_matches_linear_series(ondiag_scenes):
    # spec example: t ~ alpha*(s+u) = -1.25*0.015 at (0.01, 0.005)
    smp = solve_ondiag(ondiag_scenes["A3"], 0.01, 0.005)
    assert smp.t == pytest.approx(-0.01875, abs=1e-4)
    assert smp.v == pytest.approx(-0.01875, abs=1e-4)
    assert smp.residual < 1e-12


def test_antidiagonal_solves_are_second_order(ondiag_scenes):
    for h in (0.01, 0.005):
        smp = solve_ondiag(ondiag_scenes["A3"], h, -h)
        assert abs(smp.t) < 4 * h * h
        assert abs(smp.v) < 4 * h * h


def test_series_fit_alpha(ondiag_scenes):
    fit = series_fit(ondiag_scenes["A3"])
    alpha = predicted_coeffs(A3_PATCH, "A3")["alpha"]
    assert fit.t_coeffs[(1, 0)] == pytest.approx(alpha, rel=1e-3)
    assert fit.t_coeffs[(0, 1)] == pytest.approx(alpha, rel=1e-3)


def test_series_fit_a4_coefficients(ondiag_scenes):
    fit = series_fit(ondiag_scenes["A4"])
    pred = predicted_coeffs(A4_PATCH, "A4")
    assert fit.t_coeffs[(2, 0)] == pytest.approx(pred["t20"], rel=1e-2)
    assert fit.t_coeffs[(1, 1)] == pytest.approx(pred["t11"], rel=1e-2)
    assert fit.t_coeffs[(0, 2)] == pytest.approx(pred["t02"], rel=1e-2)
    ratio = fit.t_coeffs[(1, 1)] / fit.t_coeffs[(0, 2)]
    assert ratio == pytest.approx(4.0 / 3.0, abs=1e-2)
    # mirrored coefficients in v, per the swap symmetry
    assert fit.v_coeffs[(2, 0)] == pytest.approx(pred["t02"], rel=1e-2)
    assert fit.v_coeffs[(0, 2)] == pytest.approx(pred["t20"], rel=1e-2)


def test_series_fit_residual_truncation_scaling(ondiag_scenes):
    # halving the stencil radius must shrink the fit residual at the
    # truncation rate (degree-5 fit: order >= 6), far faster than noise
    f1 = series_fit(ondiag_scenes["A4"], h=0.02)
    f2 = series_fit(ondiag_scenes["A4"], h=0.01)
    assert f2.rms_residual < f1.rms_residual / 8.0


def test_a5_series_structure(ondiag_scenes):
    fit = series_fit(ondiag_scenes["A5"], case="A5")
    pred = predicted_coeffs(A5_PATCH, "A5")
    assert fit.t_coeffs[(2, 0)] == pytest.approx(pred["s2"], rel=1e-2)
    assert abs(fit.t_coeffs[(1, 1)]) < 1e-3
    assert abs(fit.t_coeffs[(0, 2)]) < 1e-3
    t21 = fit.t_coeffs[(2, 1)]
    assert abs(t21) > 0.5
    assert fit.t_coeffs[(1, 2)] / t21 == pytest.approx(1.0, abs=5e-2)
    assert fit.t_coeffs[(0, 3)] / t21 == pytest.approx(2.0 / 3.0, abs=5e-2)


def test_swap_symmetry(ondiag_scenes):
    for case in ("A3", "A4", "A5"):
        rep = symmetry_check(ondiag_scenes[case])
        assert rep["max_defect"] < 1e-9
        assert rep["skipped"] <= 2


def test_classification(ondiag_scenes):
    expected = {"A3": "Diffeomorphism", "A4": "Fold", "A5": "Lips"}
    for case, want in expected.items():
        result, _ = ondiag_classify(ondiag_scenes[case])
        assert result.klass.value == want


def test_a4_critical_set_tangent(ondiag_scenes):
    result, _ = ondiag_classify(ondiag_scenes["A4"])
    tangent = np.asarray(result.critical.tangent)
    # tangent line 2s + 3u = 0 has direction (-3, 2)
    ref = np.array([-3.0, 2.0]) / np.hypot(3.0, 2.0)
    angle = np.degrees(np.arccos(min(1.0, abs(tangent @ ref))))
    assert angle < 1.0


def test_diagonal_limit_radius(ondiag_scenes):
    scene = ondiag_scenes["A3"]
    rows = diagonal_limit_radii(scene, 0.02)
    errs = []
    for u, r, t in rows:
        pd = principal_data(scene.patch_m, 0.02, t)
        errs.append(abs(r - 1.0 / pd.kappa1))
    # converges to the curvature-sphere radius at O(|s - u|)
    assert errs[-1] < errs[0]
    gaps = [0.02 - u for u, _, _ in rows]
    assert errs[-1] / gaps[-1] < 2.0 * max(1.0, errs[0] / gaps[0])


def test_stencil_respects_drop_bands():
    for s, u in stencil_nodes(0.02):
        assert abs(s - u) >= 0.25 * 0.02 - 1e-15
        assert abs(s + u) >= 0.25 * 0.02 - 1e-15


def test_a4_fold_two_sphere_property(ondiag_scenes):
    scene = ondiag_scenes["A4"]
    pred = predicted_coeffs(A4_PATCH, "A4")
    miscount = 0
    probes = 0
    for s_star in (-0.012, -0.008, 0.008, 0.012):
        u_c = -pred["t11"] * s_star / (2 * pred["t02"])
        t_fold = solve_ondiag(scene, s_star, u_c).t
        for sgn, expect in ((+1, 2), (-1, 0)):
            t_probe = t_fold + sgn * 3e-5 * np.sign(pred["t02"])
            roots = fold_preimages_1d(scene, s_star, t_probe, (-0.03, 0.03))
            probes += 1
            if len(roots) != expect:
                miscount += 1
    assert probes == 8
    assert miscount == 0


def test_a4_two_spheres_have_distinct_second_contacts(ondiag_scenes):
    scene = ondiag_scenes["A4"]
    pred = predicted_coeffs(A4_PATCH, "A4")
    s_star = 0.01
    u_c = -pred["t11"] * s_star / (2 * pred["t02"])
    t_fold = solve_ondiag(scene, s_star, u_c).t
    t_probe = t_fold + 3e-5 * np.sign(pred["t02"])
    roots = fold_preimages_1d(scene, s_star, t_probe, (-0.03, 0.03))
    assert len(roots) == 2
    samples = [solve_ondiag(scene, s_star, u) for u in roots]
    # same first contact, two distinct spheres with distinct second contacts
    for smp in samples:
        assert smp.t == pytest.approx(t_probe, abs=1e-7)
    d2 = np.hypot(samples[0].u - samples[1].u, samples[0].v - samples[1].v)
    assert d2 > 1e-3
    assert abs(samples[0].r - samples[1].r) > 1e-9
