"""Waypoint position control and the mission manager.

position_step turns the active waypoint into an intention-class
velocity suggestion; the safety manager still attenuates and overrides
it near obstacles, so missions inherit every safety guarantee manual
flight has.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..behaviors import Arbitration, BehaviorOutput
from ..estimation.state import VehicleState
from ..util import clamp, clamp_norm, rot2, wrap_angle
from .types import MissionKind, Waypoint, WaypointPlan

INTENTION_NAME = "mission_position"


@dataclass(frozen=True)
class MissionGains:
    kp_pos: float = 0.6
    v_mission: float = 0.5
    kp_yaw: float = 1.0
    max_yaw_rate: float = 0.5
    stall_window_s: float = 10.0
    stall_min_progress_m: float = 0.1


def _intention_toward(
    target: Waypoint, state: VehicleState, gains: MissionGains
) -> BehaviorOutput:
    err_world = target.position - state.position
    v_world = gains.kp_pos * err_world
    horiz = clamp_norm(rot2(-state.yaw) @ v_world[:2], gains.v_mission)
    vz = clamp(float(v_world[2]), -gains.v_mission, gains.v_mission)
    yaw_rate = clamp(
        gains.kp_yaw * wrap_angle(target.yaw - state.yaw),
        -gains.max_yaw_rate,
        gains.max_yaw_rate,
    )
    return BehaviorOutput(
        INTENTION_NAME,
        np.array([horiz[0], horiz[1], vz]),
        yaw_rate,
        1.0,
        Arbitration.COOPERATIVE_ADDITIVE,
    )


def keep_position(
    target: Waypoint, state: VehicleState, gains: MissionGains = MissionGains()
) -> BehaviorOutput:
    """Restoring intention toward the pose captured at engagement."""
    return _intention_toward(target, state, gains)


def position_step(
    plan: WaypointPlan,
    state: VehicleState,
    t: float,
    gains: MissionGains = MissionGains(),
) -> tuple[BehaviorOutput, bool]:
    """One mission-control tick against the active waypoint.

    Returns (intention, stalled).  Mutates the plan: progress advances
    on achievement, stall bookkeeping updates otherwise.  The intention
    is zero on the achievement tick and when the plan is complete.
    """
    wp = plan.current
    if wp is None:
        return _intention_toward_zero(state), False

    distance = float(np.linalg.norm(wp.position - state.position))
    if distance <= wp.tolerance:
        if wp.dwell_s > 0.0:
            if plan.dwell_started_t is None:
                plan.dwell_started_t = t
            if t - plan.dwell_started_t < wp.dwell_s:
                return _intention_toward_zero(state), False
        plan.advance()
        return _intention_toward_zero(state), False

    if (
        plan.best_distance is None
        or distance < plan.best_distance - gains.stall_min_progress_m
    ):
        plan.best_distance = distance
        plan.best_distance_t = t
    stalled = t - plan.best_distance_t > gains.stall_window_s
    return _intention_toward(wp, state, gains), stalled


def _intention_toward_zero(state: VehicleState) -> BehaviorOutput:
    return BehaviorOutput(
        INTENTION_NAME, np.zeros(3), 0.0, 1.0, Arbitration.COOPERATIVE_ADDITIVE
    )


class MissionManager:
    """Owns the active plan and the keep-position anchor.

    step() yields the tick's mission intention, or None when the
    operator is in direct control.  Events (waypoint reached, mission
    complete, stall) accumulate until drained by the runner.
    """

    def __init__(self, gains: MissionGains = MissionGains()):
        self.gains = gains
        self.plan: WaypointPlan | None = None
        self.keep_target: Waypoint | None = None
        self.paused = False
        self.events: list[dict] = []

    # -- requests ---------------------------------------------------

    def start(self, plan: WaypointPlan) -> None:
        self.plan = plan
        self.paused = False
        self.keep_target = None
        self.events.append(
            {
                "event": "mission_started",
                "kind": plan.kind.value,
                "waypoints": len(plan.waypoints),
                "plan": [
                    [round(w.x, 6), round(w.y, 6), round(w.z, 6), round(w.yaw, 6)]
                    for w in plan.waypoints
                ],
            }
        )
        for w in plan.warnings:
            self.events.append({"event": "mission_warning", "detail": w})

    def abort(self) -> None:
        if self.plan is not None:
            self.events.append(
                {"event": "mission_aborted", "kind": self.plan.kind.value}
            )
        self.plan = None
        self.paused = False

    def engage_keep(self, state: VehicleState) -> None:
        self.keep_target = Waypoint(state.x, state.y, state.z, state.yaw)

    def release_keep(self) -> None:
        self.keep_target = None

    @property
    def mission_active(self) -> bool:
        return self.plan is not None and not self.paused and not self.plan.complete

    def describe(self) -> dict:
        if self.plan is not None:
            return {
                "kind": self.plan.kind.value,
                "progress": self.plan.progress,
                "total": len(self.plan.waypoints),
                "paused": self.paused,
            }
        if self.keep_target is not None:
            return {"kind": MissionKind.KEEP_POSITION.value}
        return {}

    # -- control ----------------------------------------------------

    def step(self, state: VehicleState, t: float) -> BehaviorOutput | None:
        if self.mission_active:
            before = self.plan.progress
            intention, stalled = position_step(self.plan, state, t, self.gains)
            if self.plan.progress > before:
                self.events.append(
                    {"event": "waypoint_reached", "index": before}
                )
            if self.plan.complete:
                self.events.append(
                    {"event": "mission_complete", "kind": self.plan.kind.value}
                )
                last = self.plan.waypoints[-1] if self.plan.waypoints else None
                self.plan = None
                # Hold at the final waypoint instead of drifting.
                self.keep_target = last or Waypoint(state.x, state.y, state.z, state.yaw)
                return keep_position(self.keep_target, state, self.gains)
            if stalled:
                self.events.append(
                    {"event": "mission_stalled", "index": self.plan.progress}
                )
                self.paused = True
                self.engage_keep(state)
                return keep_position(self.keep_target, state, self.gains)
            return intention
        if self.keep_target is not None:
            return keep_position(self.keep_target, state, self.gains)
        return None

    def poll_events(self) -> list[dict]:
        out, self.events = self.events, []
        return out
