import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from beamsteer.errors import BehindCamera, JointLimit, NoHit
from beamsteer.geometry import epipolar_residual, fundamental_between, triangulate_direction, unit
from beamsteer.optics import (
    Heightfield,
    MirrorModel,
    MirrorState,
    Plane,
    Sphere,
    TimeVarying,
    integrate_joints,
    intersect,
    joint_rates,
    mirror_step,
    observe_spot,
)

seeds = st.integers(0, 2**32 - 1)


# ------------------------------------------------------------ ray casting


def test_plane_axis_aligned_hit():
    assert np.array_equal(intersect(Plane((0, 0, 0), (0, 0, 1)), (0, 0, 100), (0, 0, -1)), [0, 0, 0])


def test_plane_parallel_and_behind():
    with pytest.raises(NoHit):
        intersect(Plane((0, 0, 0), (0, 0, 1)), (0, 0, 100), (1, 0, 0))
    with pytest.raises(NoHit):
        intersect(Plane((0, 0, 0), (0, 0, 1)), (0, 0, 100), (0, 0, 1))


def test_sphere_front_hit():
    assert np.array_equal(intersect(Sphere((0, 0, 0), 10.0), (0, 0, 100), (0, 0, -1)), [0, 0, 10])


def test_sphere_tangent_boundary():
    s = Sphere((0, 0, 0), 10.0)
    assert np.allclose(intersect(s, (10, 0, 100), (0, 0, -1)), (10, 0, 0))
    with pytest.raises(NoHit):
        intersect(s, (10 + 1e-9, 0, 100), (0, 0, -1))


def test_sphere_behind_origin():
    with pytest.raises(NoHit):
        intersect(Sphere((0, 0, 0), 10.0), (0, 0, 100), (0, 0, 1))


def test_sphere_radius_must_be_positive():
    with pytest.raises(ValueError):
        Sphere((0, 0, 0), 0.0)


def test_heightfield_from_csv(tmp_path):
    xs = np.linspace(-50, 50, 11)
    ys = np.linspace(-40, 40, 9)
    lines = ["x,y,z"] + [f"{x},{y},{200 + 0.01 * x * x - 0.02 * y}" for y in ys for x in xs]
    f = tmp_path / "hf.csv"
    f.write_text("\n".join(lines))
    hf = Heightfield.from_csv(f)
    P = intersect(hf, (0, 0, 0), unit((0.1, 0.05, 1.0)))
    assert abs(hf.residual(P)) <= 1e-9


def test_heightfield_rejects_ragged_grid(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("0,0,1\n1,0,1\n0,1,1\n")
    with pytest.raises(ValueError):
        Heightfield.from_csv(f)


@given(seeds)
def test_spot_lies_on_surface(seed):
    rng = np.random.default_rng(seed)
    # within the smallest size of the time-varying sphere (radius 40/sqrt 8)
    z0 = unit(np.array([*rng.uniform(-0.035, 0.035, 2), 1.0]))
    tv = TimeVarying(Sphere((0, 0, 250), 40.0), 8.0, 4.0, (0, 0, 250))
    surfaces = [Sphere((0, 0, 250), 40.0), Plane((0, 0, 250), (0, 0.2, -1)), tv]
    t = rng.uniform(0, 10)
    for s in surfaces:
        P = intersect(s, (0, 0, 0), z0, t)
        assert abs(s.residual(P, t)) <= 1e-9


@given(st.floats(0, 100, allow_nan=False), st.floats(1.0, 20.0))
def test_time_varying_scale_range(t, amplitude):
    s = TimeVarying(Sphere((0, 0, 250), 40.0), amplitude, 4.0).scale(t)
    assert 1.0 / amplitude <= s <= amplitude
    assert 1.0 / math.sqrt(amplitude) - 1e-12 <= s <= math.sqrt(amplitude) + 1e-12


def test_time_varying_extremes_ratio():
    tv = TimeVarying(Sphere((0, 0, 250), 40.0), 8.0, 4.0)
    assert tv.scale(1.0) / tv.scale(3.0) == pytest.approx(8.0, rel=1e-12)
    with pytest.raises(ValueError):
        TimeVarying(Sphere(), 0.5)


# ------------------------------------------------------------------ mirror


def test_mirror_step_zero_rate_unchanged():
    m = MirrorState(np.zeros(3), unit((0.1, -0.2, 1)))
    assert np.array_equal(mirror_step(m, (0, 0, 0), 0.05).z0, m.z0)


def test_mirror_step_euler_value():
    z = mirror_step(MirrorState(np.zeros(3), (0, 0, 1)), (0, math.pi / 2, 0), 1.0).z0
    oracle = np.array([math.pi / 2, 0.0, 1.0]) / math.hypot(math.pi / 2, 1.0)
    assert np.allclose(z, oracle, atol=1e-15)
    assert np.allclose(z, (0.8436, 0.0, 0.5370), atol=5e-5)


def test_mirror_step_keeps_unit_norm():
    rng = np.random.default_rng(11)
    m = MirrorState(np.zeros(3), (0, 0, 1))
    omegas = rng.normal(0, 2, (100_000, 3))
    worst = 0.0
    for w in omegas:
        m = mirror_step(m, w, 0.01)
        worst = max(worst, abs(np.linalg.norm(m.z0) - 1.0))
    assert worst <= 1e-12


def test_joint_rates_default_model():
    model = MirrorModel()
    assert np.array_equal(joint_rates(model, (0, 0, 0)), [0, 0])
    assert np.array_equal(joint_rates(model, (0.3, -0.7, 5.0)), [0.3, -0.7])


@given(seeds)
def test_orthogonal_model_ignores_spin_about_beam(seed):
    rng = np.random.default_rng(seed)
    z = unit(rng.normal(size=3))
    model = MirrorModel.orthogonal_to(z)
    assert np.linalg.matrix_rank(model.D_inv) == 2
    assert np.allclose(joint_rates(model, 3.7 * z), 0.0, atol=1e-12)


def test_joint_limit():
    model = MirrorModel(joint_limit=0.1)
    with pytest.raises(JointLimit):
        integrate_joints(model, np.zeros(2), (5.0, 0, 0), 0.05)


# ------------------------------------------------------------- observation


def test_noise_free_observation_is_consistent(cams):
    camL, camR = cams
    m = MirrorState(np.zeros(3), unit((0.05, -0.03, 1.0)))
    obs = observe_spot(Sphere((0, 0, 250), 40.0), m, camL, camR)
    assert abs(epipolar_residual(fundamental_between(camR, camL), obs.pL, obs.pR)) <= 1e-9
    z = triangulate_direction(obs.pL, obs.pR, camL, camR, m.pivot)
    assert math.atan2(np.linalg.norm(np.cross(z, m.z0)), z @ m.z0) <= 1e-8


def test_noisy_observation_is_reproducible(cams):
    camL, camR = cams
    m = MirrorState(np.zeros(3), (0, 0, 1))
    scene = Sphere((0, 0, 250), 40.0)
    a = observe_spot(scene, m, camL, camR, 0.5, np.random.default_rng(7))
    b = observe_spot(scene, m, camL, camR, 0.5, np.random.default_rng(7))
    assert a.pL.tobytes() == b.pL.tobytes() and a.pR.tobytes() == b.pR.tobytes()


def test_spot_behind_camera(cams):
    camL, camR = cams
    m = MirrorState(np.zeros(3), (0, 0, -1))
    with pytest.raises(BehindCamera):
        observe_spot(Plane((0, 0, -100), (0, 0, 1)), m, camL, camR)
