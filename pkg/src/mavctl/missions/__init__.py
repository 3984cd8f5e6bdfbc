from .executor import (
    INTENTION_NAME,
    MissionGains,
    MissionManager,
    keep_position,
    position_step,
)
from .planners import plan_go_home, plan_sweep, plan_vertical
from .types import MissionKind, MissionSpec, PlanningError, Waypoint, WaypointPlan
from .walls import WallFit, fit_front_wall

__all__ = [
    "INTENTION_NAME",
    "MissionGains",
    "MissionKind",
    "MissionManager",
    "MissionSpec",
    "PlanningError",
    "WallFit",
    "Waypoint",
    "WaypointPlan",
    "fit_front_wall",
    "keep_position",
    "plan_go_home",
    "plan_sweep",
    "plan_vertical",
    "position_step",
]
