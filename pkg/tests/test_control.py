import itertools
import math

import numpy as np
import pytest

from mavctl.behaviors import (
    Arbitration,
    BehaviorContext,
    BehaviorOutput,
    ViabilityVerdict,
    attenuated_go,
    limit_max_height,
    prevent_collision,
)
from mavctl.control import (
    ControlGains,
    DuplicateIntentionError,
    FlightEvent,
    FlightPhase,
    FusedCommand,
    PidController,
    VelocityController,
    fsm_step,
    fuse,
    on_ground_guard,
)
from mavctl.estimation import VehicleState
from mavctl.sim import InnerLoopSetpoint, Simulator, VehicleTruth

from test_behaviors import ctx_with, scan_from, wall_scan


def intention(vx=0.0, vy=0.0, vz=0.0, yaw_rate=0.0, name="attenuated_go"):
    return BehaviorOutput(
        name, np.array([vx, vy, vz]), yaw_rate, 1.0, Arbitration.COOPERATIVE_ADDITIVE
    )


class TestPid:
    def test_p_term_first_tick(self):
        pid = PidController(kp=0.3)
        assert pid.step(0.5, 0.02) == pytest.approx(0.15)

    def test_derivative_kicks_in_second_tick(self):
        pid = PidController(kp=0.0, kd=0.02)
        assert pid.step(0.5, 0.1) == 0.0
        assert pid.step(0.6, 0.1) == pytest.approx(0.02 * (0.6 - 0.5) / 0.1)

    def test_integral_windup_bounded(self):
        pid = PidController(kp=0.0, ki=1.0, output_limit=0.1, integral_limit=0.5)
        for _ in range(10000):
            pid.step(10.0, 0.02)
        assert pid.integral == pytest.approx(0.5)
        assert pid.step(10.0, 0.02) == pytest.approx(0.1)

    def test_output_clamped(self):
        pid = PidController(kp=1.0, output_limit=0.35)
        assert pid.step(5.0, 0.02) == pytest.approx(0.35)
        assert pid.step(-5.0, 0.02) == pytest.approx(-0.35)

    def test_reset_clears_state(self):
        pid = PidController(kp=0.1, ki=0.1, kd=0.1)
        pid.step(1.0, 0.1)
        pid.reset()
        assert pid.integral == 0.0 and pid.last_error is None

    def test_bad_dt_raises(self):
        with pytest.raises(ValueError):
            PidController(kp=1.0).step(1.0, 0.0)


class TestFsm:
    LEGAL = {
        (FlightPhase.ON_GROUND, FlightEvent.TAKEOFF_CMD): FlightPhase.TAKING_OFF,
        (FlightPhase.TAKING_OFF, FlightEvent.ALTITUDE_REACHED): FlightPhase.FLYING,
        (FlightPhase.TAKING_OFF, FlightEvent.ABORT): FlightPhase.LANDING,
        (FlightPhase.TAKING_OFF, FlightEvent.LAND_CMD): FlightPhase.LANDING,
        (FlightPhase.FLYING, FlightEvent.LAND_CMD): FlightPhase.LANDING,
        (FlightPhase.FLYING, FlightEvent.ABORT): FlightPhase.LANDING,
        (FlightPhase.LANDING, FlightEvent.TOUCHDOWN): FlightPhase.ON_GROUND,
    }

    def test_every_phase_event_pair(self):
        for phase, event in itertools.product(FlightPhase, FlightEvent):
            nxt, ok = fsm_step(phase, event)
            if (phase, event) in self.LEGAL:
                assert ok and nxt is self.LEGAL[(phase, event)]
            else:
                assert not ok and nxt is phase

    def test_landing_one_event_from_every_airborne_phase(self):
        for phase in (FlightPhase.TAKING_OFF, FlightPhase.FLYING):
            nxt, ok = fsm_step(phase, FlightEvent.ABORT)
            assert ok and nxt is FlightPhase.LANDING

    def test_motor_guard(self):
        assert not on_ground_guard(FlightPhase.ON_GROUND)
        for phase in (FlightPhase.TAKING_OFF, FlightPhase.FLYING, FlightPhase.LANDING):
            assert on_ground_guard(phase)


class TestFuse:
    def test_intention_passthrough(self):
        cmd = fuse([intention(vx=1.0)], ViabilityVerdict.OK)
        assert (cmd.vx, cmd.vy, cmd.vz) == (1.0, 0.0, 0.0)

    def test_hold_zeroes_intention(self):
        cmd = fuse([intention(vx=1.0, yaw_rate=0.4)], ViabilityVerdict.HOLD)
        assert cmd.vx == 0.0 and cmd.yaw_rate == 0.0

    def test_wall_pushback_beats_user(self):
        # User shoves toward a wall at 1.0 m; fused longitudinal goes negative.
        ctx = ctx_with(user_cmd=np.array([1.0, 0.0, 0.0]), scan=wall_scan(1.0))
        cmd = fuse([attenuated_go(ctx), prevent_collision(ctx)], ViabilityVerdict.OK)
        assert cmd.vx < 0.0

    def test_hold_keeps_repulsion(self):
        ctx = ctx_with(user_cmd=np.array([1.0, 0.0, 0.0]), scan=wall_scan(1.0))
        cmd = fuse([attenuated_go(ctx), prevent_collision(ctx)], ViabilityVerdict.HOLD)
        assert cmd.vx < 0.0

    def test_duplicate_intention_rejected(self):
        with pytest.raises(DuplicateIntentionError):
            fuse([intention(vx=1.0), intention(vy=1.0, name="other")], ViabilityVerdict.OK)

    def test_climb_cap_applies_last(self):
        lim = BehaviorOutput(
            "limit_max_height",
            np.zeros(3),
            0.0,
            1.0,
            Arbitration.COMPETITIVE_LIMIT,
            vz_cap=0.1,
        )
        cmd = fuse([intention(vz=0.8), lim], ViabilityVerdict.OK)
        assert cmd.vz == pytest.approx(0.1)

    def test_limits_hold_for_arbitrary_outputs(self):
        rng = np.random.default_rng(3)
        classes = list(Arbitration)
        for _ in range(300):
            outs = []
            for k in range(rng.integers(1, 5)):
                arb = classes[rng.integers(0, 3)]
                outs.append(
                    BehaviorOutput(
                        f"b{k}",
                        rng.uniform(-3, 3, size=3),
                        float(rng.uniform(-2, 2)),
                        float(rng.uniform(0, 1)),
                        arb,
                        vz_cap=float(rng.uniform(-1, 1)) if arb is Arbitration.COMPETITIVE_LIMIT else None,
                    )
                )
            additive = [o for o in outs if o.active and o.arbitration is Arbitration.COOPERATIVE_ADDITIVE]
            if len(additive) > 1:
                continue
            cmd = fuse(outs, ViabilityVerdict.OK)
            assert math.hypot(cmd.vx, cmd.vy) <= 1.0 + 1e-9
            assert abs(cmd.vz) <= 1.0 + 1e-9

    def test_fused_never_toward_close_obstacle(self):
        # Safety dominance across random worlds and commands.
        rng = np.random.default_rng(11)
        for _ in range(150):
            beams = {
                float(rng.uniform(-135.0, 135.0)): float(rng.uniform(0.3, 4.0))
                for _ in range(rng.integers(1, 7))
            }
            scan = scan_from(beams)
            ctx = ctx_with(user_cmd=rng.uniform(-1.5, 1.5, size=3), scan=scan)
            cmd = fuse([attenuated_go(ctx), prevent_collision(ctx)], ViabilityVerdict.OK)
            hit = scan.valid_mask() & (scan.ranges < 1.3)
            for th in scan.angles[hit]:
                u = np.array([math.cos(th), math.sin(th)])
                assert float(cmd.horizontal @ u) <= 1e-9

    def test_contributors_recorded(self):
        ctx = ctx_with(user_cmd=np.array([0.5, 0.0, 0.0]), scan=wall_scan(1.0))
        cmd = fuse([attenuated_go(ctx), prevent_collision(ctx)], ViabilityVerdict.OK)
        names = [n for n, _ in cmd.contributors]
        assert "attenuated_go" in names and "prevent_collision" in names


class TestVelocityLoop:
    def fresh_state(self, **kw):
        kw.setdefault("t", 0.0)
        return VehicleState(**kw)

    def test_p_term_oracle(self):
        ctl = VelocityController(ControlGains(vel_kp=0.3, vel_ki=0.0, vel_kd=0.0))
        sp, stale = ctl.step(FusedCommand(vx=0.5), self.fresh_state(), now=0.0, dt=0.02)
        assert not stale
        assert sp.pitch == pytest.approx(0.15)
        assert sp.roll == pytest.approx(0.0)

    def test_lateral_sign_convention(self):
        ctl = VelocityController(ControlGains(vel_kp=0.3, vel_ki=0.0, vel_kd=0.0))
        sp, _ = ctl.step(FusedCommand(vy=0.5), self.fresh_state(), now=0.0, dt=0.02)
        assert sp.roll == pytest.approx(-0.15)

    def test_body_frame_error_uses_yaw(self):
        # Moving +x world while facing +y: body-frame forward speed is 0.
        ctl = VelocityController(ControlGains(vel_kp=0.3, vel_ki=0.0, vel_kd=0.0))
        state = self.fresh_state(yaw=math.pi / 2, vx=0.4)
        sp, _ = ctl.step(FusedCommand(vx=0.0, vy=0.0), state, now=0.0, dt=0.02)
        assert sp.pitch == pytest.approx(0.0, abs=1e-12)
        # vx world maps to -vy body at +90 deg yaw; roll must push +y body.
        assert sp.roll == pytest.approx(-0.12)

    def test_altitude_hold_engages_on_zero_vz(self):
        gains = ControlGains()
        ctl = VelocityController(gains)
        ctl.step(FusedCommand(vz=0.0), self.fresh_state(z=1.0), now=0.0, dt=0.02)
        assert ctl.hold_z == pytest.approx(1.0)
        sp, _ = ctl.step(FusedCommand(vz=0.0), self.fresh_state(z=0.9), now=0.0, dt=0.02)
        oracle = gains.alt_kp * 0.1 + gains.alt_ki * (0.1 * 0.02)
        assert sp.vz == pytest.approx(oracle)

    def test_hold_reference_recaptured_after_climb(self):
        ctl = VelocityController()
        ctl.step(FusedCommand(vz=0.0), self.fresh_state(z=1.0), now=0.0, dt=0.02)
        ctl.step(FusedCommand(vz=0.5), self.fresh_state(z=1.2), now=0.0, dt=0.02)
        assert ctl.hold_z is None
        ctl.step(FusedCommand(vz=0.0), self.fresh_state(z=1.6), now=0.0, dt=0.02)
        assert ctl.hold_z == pytest.approx(1.6)

    def test_stale_state_zeroes_setpoints(self):
        ctl = VelocityController()
        state = self.fresh_state(vx=0.5, z=2.0)
        sp, stale = ctl.step(FusedCommand(vx=1.0), state, now=0.3, dt=0.02)
        assert stale
        assert sp == InnerLoopSetpoint()

    def test_nonzero_vz_passthrough(self):
        ctl = VelocityController()
        sp, _ = ctl.step(FusedCommand(vz=-0.3, yaw_rate=0.2), self.fresh_state(), 0.0, 0.02)
        assert sp.vz == pytest.approx(-0.3)
        assert sp.yaw_rate == pytest.approx(0.2)


def truth_as_state(truth: VehicleTruth, t: float) -> VehicleState:
    return VehicleState(
        x=float(truth.position[0]),
        y=float(truth.position[1]),
        z=float(truth.position[2]),
        roll=truth.roll,
        pitch=truth.pitch,
        yaw=truth.yaw,
        vx=float(truth.velocity[0]),
        vy=float(truth.velocity[1]),
        vz=float(truth.velocity[2]),
        t=t,
    )


def test_closed_loop_velocity_step(quiet_room):
    # 0.5 m/s forward step: in [0.45, 0.55] by 2 s, overshoot under 20%.
    sim = Simulator(quiet_room, seed=1, start=VehicleTruth.at(0.0, 0.0, 1.5, 0.0))
    ctl = VelocityController()
    cmd = FusedCommand(vx=0.5)
    sp = InnerLoopSetpoint()
    speeds = []
    heights = []
    for k in range(400):  # 4 s at 100 Hz
        if k % 2 == 0:  # 50 Hz control
            state = truth_as_state(sim.truth, sim.t)
            sp, stale = ctl.step(cmd, state, now=sim.t, dt=0.02)
            assert not stale
        sim.step(sp)
        speeds.append(float(sim.truth.velocity[0]))
        heights.append(float(sim.truth.position[2]))
    at_2s = speeds[199]
    assert 0.45 <= at_2s <= 0.55
    assert max(speeds) <= 0.5 * 1.2
    assert abs(heights[-1] - 1.5) < 0.1
