import numpy as np
import pytest

from mavctl.estimation import GlobalEkf, GlobalEkfConfig, LocalEkf
from mavctl.estimation.ekf import GPSI, GX, LPSI, LVX, LX, LZ


def assert_psd(p):
    assert np.max(np.abs(p - p.T)) < 1e-9
    assert np.linalg.eigvalsh(p).min() > -1e-9


def test_prediction_only_holds_position_and_grows_covariance():
    ekf = LocalEkf()
    traces = []
    for _ in range(1000):  # 10 s
        ekf.predict(0.01)
        traces.append(float(np.trace(ekf.P)))
    assert np.allclose(ekf.x[:3], 0.0)
    assert all(b > a for a, b in zip(traces, traces[1:]))
    assert_psd(ekf.P)


def test_local_velocity_updates_move_position():
    ekf = LocalEkf()
    for _ in range(200):
        ekf.predict(0.01)
        ekf.update_velocity(0.5, 0.0)
    assert ekf.x[LVX] == pytest.approx(0.5, abs=0.02)
    assert ekf.x[LX] > 0.5  # integrated roughly 2 s of motion
    assert_psd(ekf.P)


def test_local_yaw_update_wraps_innovation():
    ekf = LocalEkf()
    ekf.x[LPSI] = 3.1
    for _ in range(50):
        ekf.predict(0.01)
        ekf.update_yaw(-3.1)  # only 0.083 rad away across the wrap
    assert abs(ekf.x[LPSI]) > 3.1  # moved toward the wrap, not through zero
    assert_psd(ekf.P)


def test_local_height_update():
    ekf = LocalEkf()
    for _ in range(100):
        ekf.predict(0.01)
        ekf.update_height(2.0, 0.0)
    assert ekf.x[LZ] == pytest.approx(2.0, abs=0.02)


def test_uwb_correction_matches_scalar_kalman_gain_oracle():
    config = GlobalEkfConfig()
    ekf = GlobalEkf(config)
    p = 0.04
    ekf.P = np.eye(4) * p
    ekf.x = np.array([0.5, 0.0, 0.0, 0.0])  # dead-reckoned 0.5 m off truth
    fix = np.zeros(3)
    k = p / (p + config.r_uwb)  # 1D Kalman gain per axis, H = I
    accepted = ekf.update_uwb(fix)
    assert accepted
    assert ekf.x[GX] == pytest.approx(0.5 - k * 0.5, abs=1e-12)
    assert_psd(ekf.P)


def test_uwb_gate_rejects_beyond_three_sigma():
    config = GlobalEkfConfig()
    ekf = GlobalEkf(config)
    ekf.P = np.eye(4) * 1e-4
    sigma = np.sqrt(1e-4 + config.r_uwb)
    bad_fix = np.array([3.5 * sigma, 0.0, 0.0])
    assert not ekf.update_uwb(bad_fix)
    assert ekf.x[GX] == 0.0
    good_fix = np.array([2.5 * sigma, 0.0, 0.0])
    assert ekf.update_uwb(good_fix)


def test_global_tracks_local_deltas_without_fixes():
    ekf = GlobalEkf()
    for _ in range(100):
        ekf.predict_with_delta(np.array([0.01, 0.0, 0.0, 0.001]), 0.01)
    assert ekf.x[GX] == pytest.approx(1.0, abs=1e-9)
    assert ekf.x[GPSI] == pytest.approx(0.1, abs=1e-9)


def test_global_yaw_wraps_on_delta_accumulation():
    ekf = GlobalEkf()
    for _ in range(700):
        ekf.predict_with_delta(np.array([0.0, 0.0, 0.0, 0.01]), 0.01)
    assert -np.pi < ekf.x[GPSI] <= np.pi


def test_divergence_flag():
    config = GlobalEkfConfig(cov_trace_cap=3.0)
    ekf = GlobalEkf(config)
    assert not ekf.diverged  # initial trace 4 * 0.5 = 2.0
    for _ in range(100000):
        ekf.predict_with_delta(np.zeros(4), 0.01)
    assert ekf.diverged


def test_covariances_stay_psd_under_random_update_storm():
    rng = np.random.default_rng(9)
    local = LocalEkf()
    global_ = GlobalEkf()
    for _ in range(3000):
        dt = float(rng.uniform(0.005, 0.05))
        local.predict(dt)
        if rng.random() < 0.5:
            local.update_velocity(float(rng.normal(0, 1)), float(rng.normal(0, 1)))
        if rng.random() < 0.5:
            local.update_height(float(rng.normal(2, 1)), float(rng.normal(0, 0.5)))
        if rng.random() < 0.5:
            local.update_yaw(float(rng.uniform(-np.pi, np.pi)))
        global_.predict_with_delta(rng.normal(0, 0.01, 4), dt)
        if rng.random() < 0.2:
            global_.update_uwb(global_.x[:3] + rng.normal(0, 0.15, 3))
        assert_psd(local.P)
        assert_psd(global_.P)
