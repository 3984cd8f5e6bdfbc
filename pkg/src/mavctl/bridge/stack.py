"""The assembled vehicle: simulator plus full control stack, tick by tick.

One ControlStack owns everything that happens between two wall-clock
interfaces (script runner or protocol server): dynamics, estimation,
viability, missions, behavior fusion, and the velocity loop. Commands
enter only through the request_* methods, which run at control-tick
boundaries; there is no other path to the actuators, so no external
message can bypass arbitration.

Rates: simulator 100 Hz, control every 2nd tick (50 Hz).
"""

from __future__ import annotations

import numpy as np

from ..behaviors import (
    BehaviorContext,
    ViabilityVerdict,
    attenuated_go,
    attenuated_inspect,
    check_flight_viability,
    limit_max_height,
    prevent_collision,
)
from ..control import (
    FlightEvent,
    FlightPhase,
    FusedCommand,
    HOLD_COMMAND,
    VelocityController,
    fsm_step,
    fuse,
)
from ..estimation import EstimationPipeline
from ..estimation.state import VehicleState
from ..missions import (
    MissionKind,
    MissionManager,
    MissionSpec,
    PlanningError,
    Waypoint,
    plan_go_home,
    plan_sweep,
    plan_vertical,
)
from ..sim.engine import SIM_DT, Simulator
from ..sim.vehicle import InnerLoopSetpoint, VehicleTruth
from ..sim.world import WorldModel
from .config import RunConfig

CONTROL_DIV = 2  # control tick every 2nd sim tick


class ControlStack:
    def __init__(
        self,
        world: WorldModel,
        config: RunConfig,
        seed: int,
        start: tuple[float, float, float] = (0.0, 0.0, 0.0),
        heartbeat_monitor: bool = False,
    ):
        self.world = world
        self.config = config
        self.limits = config.limits
        self.flight = config.flight
        x0, y0, yaw0 = start
        self.sim = Simulator(world, seed, start=VehicleTruth.at(x0, y0, 0.0, yaw0))
        self.pipeline = EstimationPipeline()
        self.controller = VelocityController(config.gains)
        self.missions = MissionManager(config.mission_gains)

        self.phase = FlightPhase.ON_GROUND
        self.state = VehicleState()
        self.home: Waypoint | None = None
        self.user_velocity = np.zeros(3)
        self.user_yaw_rate = 0.0
        self.inspection_mode = False
        self.heartbeat_monitor = heartbeat_monitor
        self.last_message_t = 0.0

        self.scan = None
        self.ceiling: float | None = None
        self.range_down: float | None = None
        self.verdict = ViabilityVerdict.OK
        self.cmd: FusedCommand = HOLD_COMMAND
        self.setpoint = InnerLoopSetpoint()
        self.activations: dict[str, float] = {}
        self.min_obstacle_d = float("inf")
        self.aborted_land_now = False

        self.events: list[dict] = []
        self.tick_count = 0
        self.control_ticks = 0
        self._hold_active = False
        self._hold_restore = ""
        self._returning_home = False

    # -- lifecycle ----------------------------------------------------

    def tick(self) -> bool:
        """One 10 ms simulator step; returns True on control ticks."""
        frame = self.sim.step(self.setpoint, motors_on=self.phase is not FlightPhase.ON_GROUND)
        if frame.laser is not None:
            self.scan = frame.laser
        if frame.range_up is not None:
            self.ceiling = frame.range_up
        if frame.range_down is not None:
            self.range_down = frame.range_down
        self.state = self.pipeline.update(frame)
        self.tick_count += 1
        if self.tick_count % CONTROL_DIV:
            return False
        self._control_tick()
        self.control_ticks += 1
        return True

    def _control_tick(self) -> None:
        now = self.sim.t
        self._auto_transitions()

        battery = self.sim.truth.battery_fraction
        heartbeat_age = (now - self.last_message_t) if self.heartbeat_monitor else 0.0
        self.verdict = check_flight_viability(
            BehaviorContext(
                state=self.state,
                battery_fraction=battery,
                heartbeat_age_s=heartbeat_age,
                limits=self.limits,
            )
        )
        self._apply_verdict(now)

        intention_v, intention_yaw = self._intention(now)
        ctx = BehaviorContext(
            state=self.state,
            scan=self.scan,
            ceiling_distance=self.ceiling,
            user_cmd=intention_v,
            user_yaw_rate=intention_yaw,
            inspection_mode=self.inspection_mode and self.phase is FlightPhase.FLYING,
            battery_fraction=battery,
            heartbeat_age_s=heartbeat_age,
            limits=self.limits,
        )
        outputs = [
            attenuated_go(ctx),
            attenuated_inspect(ctx),
            prevent_collision(ctx),
            limit_max_height(ctx),
        ]
        self.activations = {o.name: o.activation for o in outputs}

        if self.phase is FlightPhase.ON_GROUND:
            self.cmd = HOLD_COMMAND
            self.setpoint = InnerLoopSetpoint()
        else:
            # Verdict responses are already in place (keep engaged, go-home
            # planned, landing forced), so fusion only needs HOLD when the
            # operator intention itself must be suppressed.
            fuse_verdict = ViabilityVerdict.OK if self._hold_active else self.verdict
            self.cmd = fuse(outputs, fuse_verdict, self.limits)
            self.setpoint, _ = self.controller.step(self.cmd, self.state, now, SIM_DT * CONTROL_DIV)

        self.min_obstacle_d = self.sim.nearest_obstacle_distance()
        for ev in self.missions.poll_events():
            self._event(now, **ev)

    def _auto_transitions(self) -> None:
        if self.phase is FlightPhase.TAKING_OFF and self.state.z >= self.flight.takeoff_height:
            self._transition(FlightEvent.ALTITUDE_REACHED)
            self.home = Waypoint(
                self.state.x,
                self.state.y,
                self.state.z,
                self.state.yaw,
                tolerance=self.config.mission_defaults.tolerance,
            )
            self._event(
                self.sim.t,
                event="home_recorded",
                x=round(self.home.x, 6),
                y=round(self.home.y, 6),
                z=round(self.home.z, 6),
            )
        elif (
            self.phase is FlightPhase.LANDING
            and self.range_down is not None
            and self.range_down < self.flight.touchdown_range
            and abs(self.state.vz) < self.flight.touchdown_vz
        ):
            self._transition(FlightEvent.TOUCHDOWN)
            self.controller.reset()
            self.setpoint = InnerLoopSetpoint()
            self.missions.abort()
            self.missions.release_keep()
            self.user_velocity = np.zeros(3)
            self.user_yaw_rate = 0.0
            self._hold_active = False
            self._returning_home = False

    def _apply_verdict(self, now: float) -> None:
        verdict = self.verdict
        if verdict is ViabilityVerdict.LAND_NOW and self.phase in (
            FlightPhase.TAKING_OFF,
            FlightPhase.FLYING,
        ):
            self._event(now, event="viability", verdict=verdict.name.lower())
            self.missions.abort()
            self.missions.release_keep()
            self.user_velocity = np.zeros(3)
            self.user_yaw_rate = 0.0
            self._transition(FlightEvent.ABORT)
            self.aborted_land_now = True
            return
        if (
            verdict is ViabilityVerdict.RETURN_HOME
            and self.phase is FlightPhase.FLYING
            and not self._returning_home
        ):
            self._event(now, event="viability", verdict=verdict.name.lower())
            self._returning_home = True
            try:
                self.missions.start(plan_go_home(self.home, self.state))
            except PlanningError:
                self.missions.engage_keep(self.state)
            return
        if (
            verdict is ViabilityVerdict.HOLD
            and self.phase is FlightPhase.FLYING
            and not self._hold_active
        ):
            self._hold_active = True
            if self.missions.mission_active:
                self.missions.paused = True
                self.missions.engage_keep(self.state)
                self._hold_restore = "mission"
            elif self.missions.keep_target is not None:
                self._hold_restore = "keep"
            else:
                self.missions.engage_keep(self.state)
                self._hold_restore = "velocity"
            self._event(now, event="hold_engaged", reason="heartbeat")
            return
        if verdict is ViabilityVerdict.OK and self._hold_active:
            self._hold_active = False
            if self._hold_restore == "mission":
                self.missions.release_keep()
                self.missions.paused = False
            elif self._hold_restore == "velocity":
                self.missions.release_keep()
            self._event(now, event="hold_released")

    def _intention(self, now: float) -> tuple[np.ndarray, float]:
        if self.phase is FlightPhase.TAKING_OFF:
            return np.array([0.0, 0.0, self.flight.takeoff_speed]), 0.0
        if self.phase is FlightPhase.LANDING:
            return np.array([0.0, 0.0, -self.flight.landing_speed]), 0.0
        if self.phase is FlightPhase.FLYING:
            mission = self.missions.step(self.state, now)
            if mission is not None:
                return mission.velocity.copy(), mission.yaw_rate
            return self.user_velocity.copy(), self.user_yaw_rate
        return np.zeros(3), 0.0

    def _transition(self, event: FlightEvent) -> bool:
        nxt, legal = fsm_step(self.phase, event)
        if legal:
            self.phase = nxt
            self._event(self.sim.t, event="phase", phase=nxt.value, cause=event.value)
        return legal

    def _event(self, t: float, **fields) -> None:
        self.events.append({"t": round(t, 6), **fields})

    def drain_events(self) -> list[dict]:
        out, self.events = self.events, []
        return out

    # -- operator requests (script or wire) ---------------------------

    def note_message(self) -> None:
        """Any received message proves the operator link is alive."""
        self.last_message_t = self.sim.t

    def request_takeoff(self) -> tuple[bool, str]:
        if not self._transition(FlightEvent.TAKEOFF_CMD):
            return False, f"takeoff illegal while {self.phase.value}"
        return True, ""

    def request_land(self) -> tuple[bool, str]:
        if not self._transition(FlightEvent.LAND_CMD):
            return False, f"land illegal while {self.phase.value}"
        self.missions.abort()
        self.missions.release_keep()
        self.user_velocity = np.zeros(3)
        self.user_yaw_rate = 0.0
        return True, ""

    def set_velocity(self, vx: float, vy: float, vz: float, yaw_rate: float) -> tuple[bool, str]:
        nonzero = any(abs(v) > 1e-9 for v in (vx, vy, vz, yaw_rate))
        if self.missions.mission_active and nonzero:
            self.missions.abort()
            self._event(self.sim.t, event="operator_override")
        if nonzero and self.missions.keep_target is not None:
            self.missions.release_keep()
        self.user_velocity = np.array([vx, vy, vz], dtype=float)
        self.user_yaw_rate = float(yaw_rate)
        detail = ""
        if np.hypot(vx, vy) > self.limits.v_max or abs(vz) > self.limits.vz_max:
            detail = "clamped to velocity limits"
        return True, detail

    def set_inspection(self, on: bool) -> tuple[bool, str]:
        self.inspection_mode = bool(on)
        self._event(self.sim.t, event="inspection_mode", on=self.inspection_mode)
        return True, ""

    def request_sweep(
        self, width: float, height: float, spacing: float, end_to_end: bool
    ) -> tuple[bool, str]:
        if self.phase is not FlightPhase.FLYING:
            return False, f"sweep illegal while {self.phase.value}"
        if self.scan is None:
            return False, "no laser scan yet"
        defaults = self.config.mission_defaults
        spec = MissionSpec(
            kind=MissionKind.SWEEP,
            width=width,
            height=height,
            spacing=spacing,
            standoff=defaults.standoff,
            end_to_end=end_to_end,
            edge_margin=defaults.edge_margin,
            tolerance=defaults.tolerance,
            z_max=self.limits.z_max,
        )
        try:
            plan = plan_sweep(spec, self.state, self.scan)
        except PlanningError as e:
            return False, str(e)
        self.missions.start(plan)
        return True, ""

    def request_vertical(
        self, max_height: float, offset: float, bearing: float, spacing: float = 1.0
    ) -> tuple[bool, str]:
        if self.phase is not FlightPhase.FLYING:
            return False, f"vertical illegal while {self.phase.value}"
        spec = MissionSpec(
            kind=MissionKind.VERTICAL,
            top_height=max_height,
            lateral_offset=offset,
            bearing=bearing,
            spacing=spacing,
            tolerance=self.config.mission_defaults.tolerance,
            z_max=self.limits.z_max,
        )
        try:
            plan = plan_vertical(spec, self.state)
        except PlanningError as e:
            return False, str(e)
        self.missions.start(plan)
        return True, ""

    def request_go_home(self) -> tuple[bool, str]:
        if self.phase is not FlightPhase.FLYING:
            return False, f"go-home illegal while {self.phase.value}"
        try:
            plan = plan_go_home(self.home, self.state)
        except PlanningError as e:
            return False, str(e)
        self.missions.start(plan)
        return True, ""

    def request_keep(self) -> tuple[bool, str]:
        if self.phase is not FlightPhase.FLYING:
            return False, f"keep illegal while {self.phase.value}"
        self.user_velocity = np.zeros(3)
        self.user_yaw_rate = 0.0
        self.missions.engage_keep(self.state)
        anchor = self.missions.keep_target
        self._event(
            self.sim.t,
            event="keep_engaged",
            x=round(anchor.x, 6),
            y=round(anchor.y, 6),
            z=round(anchor.z, 6),
            yaw=round(anchor.yaw, 6),
        )
        return True, ""

    def release_keep(self) -> tuple[bool, str]:
        self.missions.release_keep()
        self._event(self.sim.t, event="keep_released")
        return True, ""

    def set_home(self, x: float, y: float, z: float) -> tuple[bool, str]:
        self.home = Waypoint(
            float(x), float(y), float(z), 0.0, tolerance=self.config.mission_defaults.tolerance
        )
        self._event(self.sim.t, event="home_set", x=float(x), y=float(y), z=float(z))
        return True, ""

    def request_abort_mission(self) -> tuple[bool, str]:
        had = self.missions.plan is not None or self.missions.keep_target is not None
        self.missions.abort()
        self.missions.release_keep()
        return True, "" if had else "no active mission"
