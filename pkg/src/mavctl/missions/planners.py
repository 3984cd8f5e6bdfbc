"""Waypoint plan generation for the autonomous mission kinds."""

from __future__ import annotations

import math

import numpy as np

from ..estimation.state import VehicleState
from ..sim.laser import LaserScan
from .types import MissionKind, MissionSpec, PlanningError, Waypoint, WaypointPlan
from .walls import fit_front_wall


def plan_sweep(
    spec: MissionSpec, state: VehicleState, scan: LaserScan | None
) -> WaypointPlan:
    """Serpentine coverage of a wall-parallel rectangle.

    Horizontal rows from the current height upward, two waypoints per
    row at the lateral ends, alternating direction row to row.
    """
    wall = fit_front_wall(scan, state) if scan is not None else None
    if wall is None:
        raise PlanningError("no inspectable surface")
    warnings: list[str] = []

    if spec.end_to_end:
        s_lo = wall.extent[0] + spec.edge_margin
        s_hi = wall.extent[1] - spec.edge_margin
        if s_hi <= s_lo:
            raise PlanningError("wall too short for end-to-end sweep")
    else:
        s_lo, s_hi = -spec.width / 2.0, spec.width / 2.0

    rows = math.floor(spec.height / spec.spacing) + 1
    z_levels = [state.z + k * spec.spacing for k in range(rows)]
    kept = [z for z in z_levels if z <= spec.z_max]
    if len(kept) < len(z_levels):
        warnings.append(f"sweep clipped at z_max={spec.z_max:.2f}")
    if not kept:
        raise PlanningError("entire sweep above z_max")

    base = wall.foot + spec.standoff * wall.normal
    yaw = math.atan2(-wall.normal[1], -wall.normal[0])  # face the wall
    waypoints = []
    for i, z in enumerate(kept):
        ends = (s_lo, s_hi) if i % 2 == 0 else (s_hi, s_lo)
        for s in ends:
            p = base + s * wall.tangent
            waypoints.append(
                Waypoint(float(p[0]), float(p[1]), z, yaw, spec.tolerance)
            )
    return WaypointPlan(
        MissionKind.SWEEP, waypoints, params=spec, warnings=tuple(warnings)
    )


def plan_vertical(spec: MissionSpec, state: VehicleState) -> WaypointPlan:
    """Ascend beside the structure on its left, descend on its right."""
    warnings: list[str] = []
    top = spec.top_height
    if top > spec.z_max:
        top = spec.z_max
        warnings.append(f"vertical inspection clipped at z_max={spec.z_max:.2f}")
    z0 = state.z
    if top < z0:
        raise PlanningError("target height below current height")

    levels = [z0]
    while levels[-1] + spec.spacing < top - 1e-9:
        levels.append(levels[-1] + spec.spacing)
    if top > z0 + 1e-9:
        levels.append(top)

    facing = np.array([math.cos(spec.bearing), math.sin(spec.bearing)])
    left = np.array([-facing[1], facing[0]])
    pos = np.array([state.x, state.y])
    p_left = pos + spec.lateral_offset * left
    p_right = pos - spec.lateral_offset * left
    yaw = spec.bearing

    waypoints = [
        Waypoint(float(p_left[0]), float(p_left[1]), z, yaw, spec.tolerance)
        for z in levels
    ]
    waypoints += [
        Waypoint(float(p_right[0]), float(p_right[1]), z, yaw, spec.tolerance)
        for z in reversed(levels)
    ]
    return WaypointPlan(
        MissionKind.VERTICAL, waypoints, params=spec, warnings=tuple(warnings)
    )


def plan_go_home(home: Waypoint | None, state: VehicleState) -> WaypointPlan:
    """Two legs: correct altitude in place, then fly straight home."""
    if home is None:
        raise PlanningError("home not recorded")
    err = np.array([state.x - home.x, state.y - home.y, state.z - home.z])
    if float(np.linalg.norm(err)) <= home.tolerance:
        return WaypointPlan(MissionKind.GO_HOME, [])
    waypoints = []
    if abs(state.z - home.z) > 0.1:
        waypoints.append(
            Waypoint(state.x, state.y, home.z, state.yaw, home.tolerance)
        )
    waypoints.append(home)
    return WaypointPlan(MissionKind.GO_HOME, waypoints)
