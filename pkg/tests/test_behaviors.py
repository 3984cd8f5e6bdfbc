import math

import numpy as np
import pytest

from mavctl.behaviors import (
    Arbitration,
    BehaviorContext,
    BehaviorLimits,
    ViabilityVerdict,
    attenuated_go,
    attenuated_inspect,
    attenuation,
    check_flight_viability,
    limit_max_height,
    prevent_collision,
)
from mavctl.estimation import VehicleState
from mavctl.sim.laser import LaserConfig, LaserScan

CFG = LaserConfig()


def scan_from(beams: dict[float, float]) -> LaserScan:
    """Synthetic scan with returns only at the given {deg: range} beams."""
    ranges = np.full(CFG.num_beams, np.inf)
    for deg, r in beams.items():
        i = round((math.radians(deg) - CFG.angle_min) / CFG.angle_increment)
        ranges[i] = r
    return LaserScan(CFG.angle_min, CFG.angle_increment, CFG.max_range, ranges)


def wall_scan(distance: float, center_deg: float = 0.0, half_width_deg: float = 30.0) -> LaserScan:
    """Flat wall perpendicular to the bearing center_deg at the given distance."""
    angles = CFG.angle_min + CFG.angle_increment * np.arange(CFG.num_beams)
    rel = angles - math.radians(center_deg)
    ranges = np.full(CFG.num_beams, np.inf)
    mask = np.abs(rel) <= math.radians(half_width_deg)
    ranges[mask] = distance / np.cos(rel[mask])
    return LaserScan(CFG.angle_min, CFG.angle_increment, CFG.max_range, ranges)


def ctx_with(**kw) -> BehaviorContext:
    kw.setdefault("state", VehicleState())
    return BehaviorContext(**kw)


def go(user, scan, **kw):
    return attenuated_go(ctx_with(user_cmd=np.array(user, dtype=float), scan=scan, **kw))


class TestAttenuatedGo:
    def test_far_wall_passes_command_through(self):
        out = go([1.0, 0.0, 0.0], wall_scan(3.0))
        assert out.velocity[0] == pytest.approx(1.0, abs=1e-9)
        assert out.arbitration is Arbitration.COOPERATIVE_ADDITIVE

    def test_ramp_midpoint_halves_command(self):
        out = go([1.0, 0.0, 0.0], wall_scan(1.9))
        assert out.velocity[0] == pytest.approx(0.5, abs=1e-6)

    def test_inside_minimum_clearance_zeroes_command(self):
        out = go([1.0, 0.0, 0.0], wall_scan(1.2))
        assert out.velocity[0] == pytest.approx(0.0, abs=1e-9)
        assert out.activation == 1.0

    def test_attenuation_is_monotone_and_bounded(self):
        mags = []
        for d in np.linspace(0.3, 6.0, 120):
            out = go([1.0, 0.0, 0.0], wall_scan(d))
            mags.append(float(np.linalg.norm(out.velocity[:2])))
        assert all(b >= a - 1e-12 for a, b in zip(mags, mags[1:]))
        assert all(m <= 1.0 + 1e-12 for m in mags)
        for d, m in zip(np.linspace(0.3, 6.0, 120), mags):
            if d >= 2.5:
                assert m == pytest.approx(1.0, abs=1e-9)

    def test_obstacle_outside_cone_ignored(self):
        # Wall abeam at 90 deg while flying forward: outside the +-45 cone.
        out = go([1.0, 0.0, 0.0], wall_scan(1.5, center_deg=90.0, half_width_deg=20.0))
        assert out.velocity[0] == pytest.approx(1.0, abs=1e-9)

    def test_only_component_toward_obstacle_is_scaled(self):
        # Single return 40 deg off the commanded direction, inside the cone.
        scan = scan_from({40.0: 1.3})  # a(1.3) = 0
        out = go([1.0, 0.0, 0.0], scan)
        u = np.array([math.cos(math.radians(40.0)), math.sin(math.radians(40.0))])
        assert float(out.velocity[:2] @ u) == pytest.approx(0.0, abs=1e-9)
        perp = np.array([1.0, 0.0]) - (np.array([1.0, 0.0]) @ u) * u
        assert np.allclose(out.velocity[:2], perp, atol=1e-9)

    def test_command_clamped_to_v_max(self):
        out = go([3.0, 0.0, 0.0], wall_scan(5.0))
        assert out.velocity[0] == pytest.approx(1.0, abs=1e-9)

    def test_no_scan_deactivates(self):
        assert not go([1.0, 0.0, 0.0], None).active
        empty = LaserScan(CFG.angle_min, CFG.angle_increment, CFG.max_range,
                          np.full(CFG.num_beams, np.inf))
        assert not go([1.0, 0.0, 0.0], empty).active

    def test_inactive_in_inspection_mode(self):
        assert not go([1.0, 0.0, 0.0], wall_scan(3.0), inspection_mode=True).active

    def test_pure_same_context_same_output(self):
        ctx = ctx_with(user_cmd=np.array([0.7, -0.2, 0.1]), scan=wall_scan(2.0))
        a, b = attenuated_go(ctx), attenuated_go(ctx)
        assert np.array_equal(a.velocity, b.velocity) and a.activation == b.activation


class TestAttenuatedInspect:
    def insp(self, user, scan):
        return attenuated_inspect(
            ctx_with(user_cmd=np.array(user, dtype=float), scan=scan, inspection_mode=True)
        )

    def test_lateral_clamped_in_band_no_longitudinal(self):
        out = self.insp([0.0, 1.0, 0.0], wall_scan(1.7))
        assert out.velocity[1] == pytest.approx(0.3, abs=1e-6)
        assert out.velocity[0] == pytest.approx(0.0, abs=1e-6)

    def test_standoff_regulation_pulls_toward_far_wall(self):
        out = self.insp([0.0, 0.0, 0.0], wall_scan(2.5))
        assert out.velocity[0] == pytest.approx(0.25, abs=1e-6)

    def test_standoff_regulation_pushes_away_when_too_close(self):
        out = self.insp([0.0, 0.0, 0.0], wall_scan(1.2))
        assert out.velocity[0] < 0.0

    def test_never_commands_toward_wall_when_close(self):
        out = self.insp([0.3, 0.0, 0.0], wall_scan(1.2))
        assert out.velocity[0] <= 0.0

    def test_all_components_bounded_by_inspection_speed(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            user = rng.uniform(-2.0, 2.0, size=3)
            d = float(rng.uniform(0.5, 6.0))
            out = self.insp(list(user), wall_scan(d))
            assert np.all(np.abs(out.velocity) <= 0.3 + 1e-9)

    def test_no_front_surface_is_passthrough(self):
        out = self.insp([0.0, 0.2, 0.0], wall_scan(5.0, center_deg=0.0))
        assert out.velocity[0] == pytest.approx(0.0, abs=1e-9)
        assert out.velocity[1] == pytest.approx(0.2, abs=1e-9)

    def test_inactive_outside_inspection_mode(self):
        out = attenuated_inspect(ctx_with(scan=wall_scan(2.0)))
        assert not out.active


class TestPreventCollision:
    def test_wall_cluster_repels_by_distance_law(self):
        out = prevent_collision(ctx_with(scan=wall_scan(1.0)))
        expected = 0.5 * (1.0 - 1.0 / 1.3)
        assert out.velocity[0] == pytest.approx(-expected, abs=1e-6)
        assert abs(out.velocity[1]) < 1e-6
        assert out.arbitration is Arbitration.COMPETITIVE_OVERRIDE

    def test_all_clear_deactivates(self):
        out = prevent_collision(ctx_with(scan=wall_scan(1.31)))
        assert not out.active

    def test_blind_freeze(self):
        out = prevent_collision(ctx_with(scan=None))
        assert out.active and np.allclose(out.velocity, 0.0)

    def test_two_clusters_sum_and_cap(self):
        scan = scan_from({0.0: 0.4, 90.0: 0.4})
        out = prevent_collision(ctx_with(scan=scan))
        assert np.linalg.norm(out.velocity[:2]) <= 0.5 + 1e-9
        assert out.velocity[0] < 0.0 and out.velocity[1] < 0.0

    def test_never_pushes_toward_any_close_point(self):
        rng = np.random.default_rng(41)
        for _ in range(200):
            beams = {
                float(rng.uniform(-135.0, 135.0)): float(rng.uniform(0.2, 1.29))
                for _ in range(rng.integers(1, 6))
            }
            scan = scan_from(beams)
            out = prevent_collision(ctx_with(scan=scan))
            hit = scan.valid_mask() & (scan.ranges < 1.3)
            for th in scan.angles[hit]:
                u = np.array([math.cos(th), math.sin(th)])
                assert float(out.velocity[:2] @ u) <= 1e-9

    def test_opposing_walls_cancel(self):
        # 180 deg is outside the 270 deg FOV; bracket from behind instead.
        scan = scan_from({135.0: 1.0, -135.0: 1.0, 0.0: 1.0})
        out = prevent_collision(ctx_with(scan=scan))
        assert float(out.velocity[0]) <= 1e-9

    def test_no_vertical_component(self):
        out = prevent_collision(ctx_with(scan=wall_scan(0.8)))
        assert out.velocity[2] == 0.0


class TestLimitMaxHeight:
    def lim(self, z, ceiling=None, z_max=5.0):
        limits = BehaviorLimits(z_max=z_max)
        return limit_max_height(
            ctx_with(state=VehicleState(z=z), ceiling_distance=ceiling, limits=limits)
        )

    def test_above_limit_blocks_climb(self):
        out = self.lim(5.1)
        assert out.active and out.vz_cap == pytest.approx(0.0, abs=1e-9)

    def test_below_ramp_inactive(self):
        assert not self.lim(4.0).active

    def test_ramp_midpoint(self):
        out = self.lim(4.75)
        assert out.active and out.vz_cap == pytest.approx(0.5, abs=1e-9)

    def test_close_ceiling_forces_descent(self):
        out = self.lim(2.0, ceiling=1.0)
        assert out.active and out.vz_cap is not None and out.vz_cap <= 0.0
        assert out.vz_cap == pytest.approx(-0.5 * (1.0 - 1.0 / 1.3), abs=1e-6)

    def test_ceiling_ramp_attenuates_climb(self):
        out = self.lim(2.0, ceiling=1.9)
        assert out.active and out.vz_cap == pytest.approx(0.5, abs=1e-6)

    def test_horizontal_untouched(self):
        out = self.lim(5.1)
        assert np.allclose(out.velocity[:2], 0.0)


class TestViability:
    def verdict(self, battery=1.0, hb=0.0):
        return check_flight_viability(
            ctx_with(battery_fraction=battery, heartbeat_age_s=hb)
        )

    def test_nominal_ok(self):
        assert self.verdict() is ViabilityVerdict.OK

    def test_low_battery_returns_home(self):
        assert self.verdict(battery=0.2) is ViabilityVerdict.RETURN_HOME

    def test_critical_battery_lands(self):
        assert self.verdict(battery=0.05) is ViabilityVerdict.LAND_NOW

    def test_silent_link_holds(self):
        assert self.verdict(hb=3.0) is ViabilityVerdict.HOLD

    def test_dead_link_lands(self):
        assert self.verdict(hb=12.0) is ViabilityVerdict.LAND_NOW

    def test_most_severe_wins(self):
        assert self.verdict(battery=0.2, hb=12.0) is ViabilityVerdict.LAND_NOW
        assert self.verdict(battery=0.2, hb=3.0) is ViabilityVerdict.RETURN_HOME

    def test_severity_order(self):
        assert (
            ViabilityVerdict.LAND_NOW
            > ViabilityVerdict.RETURN_HOME
            > ViabilityVerdict.HOLD
            > ViabilityVerdict.OK
        )


def test_attenuation_law_endpoints():
    assert attenuation(1.3, 1.3, 2.5) == 0.0
    assert attenuation(2.5, 1.3, 2.5) == 1.0
    assert attenuation(1.9, 1.3, 2.5) == pytest.approx(0.5)
    assert attenuation(0.1, 1.3, 2.5) == 0.0
    assert attenuation(10.0, 1.3, 2.5) == 1.0
