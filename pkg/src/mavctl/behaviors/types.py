"""Shared types for the behavior layer.

Behaviors are pure functions: one BehaviorContext snapshot in, one
BehaviorOutput out.  They never command the vehicle directly; the safety
manager arbitrates all outputs for the tick according to each output's
arbitration class.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ..estimation.state import VehicleState
from ..sim.laser import LaserScan


class Arbitration(enum.Enum):
    """How fusion combines an output with the rest of the tick."""

    COOPERATIVE_ADDITIVE = "cooperative-additive"
    COMPETITIVE_OVERRIDE = "competitive-override"
    COMPETITIVE_LIMIT = "competitive-limit"


class ViabilityVerdict(enum.IntEnum):
    """Flight-continuation decision; higher value wins when combined."""

    OK = 0
    HOLD = 1
    RETURN_HOME = 2
    LAND_NOW = 3


@dataclass(frozen=True)
class BehaviorLimits:
    """Numeric envelope shared by every behavior.

    z_max defaults to unbounded; the runner sets it from the world
    ceiling unless the run configuration overrides it.
    """

    v_max: float = 1.0
    v_insp: float = 0.3
    vz_max: float = 1.0
    d_att: float = 2.5
    d_min: float = 1.3
    v_rep_max: float = 0.5
    z_max: float = math.inf
    z_ramp: float = 0.5
    inspect_band: tuple[float, float] = (1.5, 2.0)
    inspect_gain: float = 0.5
    inspect_front_max: float = 4.0
    cone_half_angle: float = math.radians(45.0)
    battery_return_home: float = 0.25
    battery_land_now: float = 0.10
    heartbeat_hold_s: float = 2.0
    heartbeat_land_s: float = 10.0


_NO_COMMAND = np.zeros(3)


@dataclass(frozen=True)
class BehaviorContext:
    """Everything the behaviors may look at during one control tick."""

    state: VehicleState = field(default_factory=VehicleState)
    scan: LaserScan | None = None
    ceiling_distance: float | None = None
    user_cmd: np.ndarray = field(default_factory=lambda: _NO_COMMAND.copy())
    user_yaw_rate: float = 0.0
    inspection_mode: bool = False
    battery_fraction: float = 1.0
    heartbeat_age_s: float = 0.0
    mission_waypoint: tuple[float, float, float] | None = None
    limits: BehaviorLimits = BehaviorLimits()


@dataclass(frozen=True)
class BehaviorOutput:
    """One behavior's suggestion for the tick.

    velocity and yaw_rate are body frame.  For COMPETITIVE_LIMIT outputs
    the suggestion is a bound, not a velocity: vz_cap is the maximum
    permitted climb rate (negative forces descent) and velocity is zero.
    COMPETITIVE_OVERRIDE outputs also publish away_wedge, the arc
    (center, half_width) of horizontal directions still permitted;
    half_width < 0 means nothing is safe and fusion must stop.
    activation 0 means fusion ignores the output entirely.
    """

    name: str
    velocity: np.ndarray
    yaw_rate: float
    activation: float
    arbitration: Arbitration
    vz_cap: float | None = None
    away_wedge: tuple[float, float] | None = None

    @property
    def active(self) -> bool:
        return self.activation > 0.0


def inactive(name: str, arbitration: Arbitration) -> BehaviorOutput:
    return BehaviorOutput(name, np.zeros(3), 0.0, 0.0, arbitration)
