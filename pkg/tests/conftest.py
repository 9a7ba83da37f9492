import numpy as np
import pytest

from presymset.geometry3d import MongePatch, SceneSpec, construct_scene, curvature_sphere_scene

N_CUBIC = (0.1, -0.05, 0.2, 0.08)


def scene_a1a1():
    return construct_scene(SceneSpec(
        contact_m="A1", m_cubic=(0.2, 0.1, -0.3, 0.15),
        m_quartic=(0.1, 0.05, -0.1, 0.2, 0.0), n_cubic=N_CUBIC,
    ))


def scene_a2a1():
    return construct_scene(SceneSpec(
        contact_m="A2", m_cubic=(0.5, 0.3, -0.2, 0.1),
        m_quartic=(0.1, 0.3, -0.2, 0.15, 0.1), n_cubic=N_CUBIC,
    ))


def scene_a3a1_generic():
    return construct_scene(SceneSpec(
        contact_m="A3", m_cubic=(0.0, 0.6, 0.4, 0.1),
        m_quartic=(0.1, 0.3, -0.2, 0.15, 0.1), m_quintic=(0.2, 0, 0, 0, 0, 0),
        n_cubic=N_CUBIC, chord_angle=1.1, chord_azimuth=0.8,
    ))


def scene_a3a1_transitional(c2):
    return construct_scene(SceneSpec(
        contact_m="A3", m_cubic=(0.0, 0.0, 0.5, 0.2),
        m_quartic=(0.1, 0.3, c2, 0.15, 0.1), m_quintic=(0.2, 0, 0, 0, 0, 0),
        n_cubic=N_CUBIC, chord_angle=1.1, transitional=True,
    ))


def scene_a4a1():
    return construct_scene(SceneSpec(
        contact_m="A4", m_cubic=(0.0, 0.6, 0.4, 0.1),
        m_quartic=(0.1, 0.3, -0.2, 0.15, 0.1), m_quintic=(0.2, 0, 0, 0, 0, 0),
        n_cubic=N_CUBIC, chord_angle=1.1, chord_azimuth=0.8,
    ))


A3_PATCH = MongePatch(1.0, 2.0, cubic=(0.0, 1.0, 1.0, 0.0),
                      quartic=(0.0, 1.0, 0.0, 0.0, 0.0))
A4_PATCH = MongePatch(1.0, 2.0, cubic=(0.0, 1.0, 1.0, 0.0),
                      quartic=(5 / 8, 1.0, 0.0, 0.0, 0.0),
                      quintic=(1.0, 0.0, 0.0, 0.0, 0.0, 0.0))
A5_PATCH = MongePatch(1.0, 2.0, cubic=(0.0, 1.0, 1.0, 0.0),
                      quartic=(5 / 8, 1.0, 0.0, 0.0, 0.0),
                      quintic=(0.0, 0.0, 0.0, 0.0, 0.0, 0.0))


@pytest.fixture(scope="session")
def a2a1_field():
    from presymset.presym3d_offdiag import solve_field

    return solve_field(scene_a2a1(), n=10, half_width=0.14)


@pytest.fixture(scope="session")
def ondiag_scenes():
    return {
        "A3": curvature_sphere_scene(A3_PATCH),
        "A4": curvature_sphere_scene(A4_PATCH),
        "A5": curvature_sphere_scene(A5_PATCH),
    }
