"""Mission domain types: waypoints, plans, and mission requests."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class MissionKind(enum.Enum):
    SWEEP = "sweep"
    VERTICAL = "vertical"
    GO_HOME = "go-home"
    KEEP_POSITION = "keep-position"


class PlanningError(ValueError):
    """Mission cannot be planned from the current state."""


@dataclass(frozen=True)
class Waypoint:
    x: float
    y: float
    z: float
    yaw: float = 0.0
    tolerance: float = 0.25
    dwell_s: float = 0.0

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class MissionSpec:
    """Parameters for one mission request; unused fields stay at defaults."""

    kind: MissionKind
    width: float = 0.0
    height: float = 0.0
    spacing: float = 1.0
    standoff: float = 2.0
    end_to_end: bool = False
    edge_margin: float = 0.5
    bearing: float = 0.0  # world bearing of the inspected structure
    top_height: float = 0.0
    lateral_offset: float = 1.0
    tolerance: float = 0.25
    z_max: float = math.inf


@dataclass
class WaypointPlan:
    kind: MissionKind
    waypoints: list[Waypoint]
    params: MissionSpec | None = None
    progress: int = 0
    warnings: tuple[str, ...] = ()
    # Stall bookkeeping for the active waypoint.
    best_distance: float | None = field(default=None, repr=False)
    best_distance_t: float = field(default=0.0, repr=False)
    dwell_started_t: float | None = field(default=None, repr=False)

    @property
    def complete(self) -> bool:
        return self.progress >= len(self.waypoints)

    @property
    def current(self) -> Waypoint | None:
        if self.complete:
            return None
        return self.waypoints[self.progress]

    def advance(self) -> None:
        self.progress += 1
        self.best_distance = None
        self.dwell_started_t = None
