import numpy as np
import pytest

from mavctl.estimation import ScanMatchResult, VelocityFusion


def good_match(dx, dy=0.0, dpsi=0.0):
    return ScanMatchResult(dx, dy, dpsi, 0.95, True)


def test_stationary_stays_zero():
    vf = VelocityFusion()
    for _ in range(100):
        vf.propagate(np.zeros(3), 0.01)
        if _ % 10 == 9:
            vf.correct(good_match(0.0), yaw_prev=0.0, dt_scan=0.1)
    assert np.allclose(vf.v, 0.0)


def test_constant_velocity_converges_within_two_seconds():
    vf = VelocityFusion()
    for k in range(200):  # 2 s at 100 Hz
        vf.propagate(np.zeros(3), 0.01)
        if k % 10 == 9:
            vf.correct(good_match(0.05), yaw_prev=0.0, dt_scan=0.1)
    assert vf.v[0] == pytest.approx(0.5, abs=0.05)
    assert abs(vf.v[1]) < 1e-9


def test_match_translation_rotated_by_previous_yaw():
    vf = VelocityFusion()
    vf.correct(good_match(0.05), yaw_prev=np.pi / 2.0, dt_scan=0.1)
    # Forward motion in a +90 degree heading is +y in the world.
    assert vf.v[0] == pytest.approx(0.0, abs=1e-12)
    assert vf.v[1] == pytest.approx(0.5, abs=1e-12)


def test_dropout_drift_bounded_by_accel_noise_propagation():
    # During a 0.5 s matcher dropout the estimate integrates accel noise only:
    # sigma_v = sigma_a * sqrt(n) * dt = 0.03 * sqrt(50) * 0.01 = 0.0021 m/s.
    rng = np.random.default_rng(4)
    vf = VelocityFusion()
    for k in range(100):
        vf.propagate(np.zeros(3), 0.01)
        if k % 10 == 9:
            vf.correct(good_match(0.05), yaw_prev=0.0, dt_scan=0.1)
    v_before = vf.v.copy()
    for _ in range(50):  # dropout: accel noise only
        noise = np.array([rng.normal(0.0, 0.03), rng.normal(0.0, 0.03), 0.0])
        vf.propagate(noise, 0.01)
    drift = np.abs(vf.v - v_before)
    assert np.all(drift < 5.0 * 0.0021)


def test_degraded_flag_after_match_silence():
    vf = VelocityFusion()
    vf.correct(good_match(0.0), yaw_prev=0.0, dt_scan=0.1)
    assert not vf.degraded
    for _ in range(31):
        vf.propagate(np.zeros(3), 0.01)
    assert vf.degraded
    vf.correct(good_match(0.0), yaw_prev=0.0, dt_scan=0.1)
    assert not vf.degraded


def test_unconverged_match_ignored():
    vf = VelocityFusion()
    vf.correct(good_match(0.05), yaw_prev=0.0, dt_scan=0.1)
    v = vf.v.copy()
    vf.correct(ScanMatchResult(5.0, 5.0, 0.0, 0.1, False), yaw_prev=0.0, dt_scan=0.1)
    assert np.array_equal(vf.v, v)


def test_first_match_initializes_directly():
    vf = VelocityFusion()
    for _ in range(50):
        vf.propagate(np.zeros(3), 0.01)
    vf.correct(good_match(0.03), yaw_prev=0.0, dt_scan=0.1)
    assert vf.v[0] == pytest.approx(0.3, abs=1e-12)
