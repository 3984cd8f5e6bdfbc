"""Four-state flight controller state machine.

The only legal ride is the cycle on-ground -> taking-off -> flying ->
landing -> on-ground, with an abort edge from both airborne build-up
phases straight to landing.  Illegal events never move the machine;
callers surface them as warnings.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class FlightPhase(enum.Enum):
    ON_GROUND = "on-ground"
    TAKING_OFF = "taking-off"
    FLYING = "flying"
    LANDING = "landing"


class FlightEvent(enum.Enum):
    TAKEOFF_CMD = "takeoff-cmd"
    LAND_CMD = "land-cmd"
    ALTITUDE_REACHED = "altitude-reached"
    TOUCHDOWN = "touchdown"
    ABORT = "abort"


@dataclass(frozen=True)
class FlightParams:
    """Vertical profile of the automatic phases; all config-exposed."""

    takeoff_speed: float = 0.5
    takeoff_height: float = 1.0
    landing_speed: float = 0.3
    touchdown_range: float = 0.15
    touchdown_vz: float = 0.05


_TRANSITIONS: dict[tuple[FlightPhase, FlightEvent], FlightPhase] = {
    (FlightPhase.ON_GROUND, FlightEvent.TAKEOFF_CMD): FlightPhase.TAKING_OFF,
    (FlightPhase.TAKING_OFF, FlightEvent.ALTITUDE_REACHED): FlightPhase.FLYING,
    (FlightPhase.TAKING_OFF, FlightEvent.ABORT): FlightPhase.LANDING,
    (FlightPhase.TAKING_OFF, FlightEvent.LAND_CMD): FlightPhase.LANDING,
    (FlightPhase.FLYING, FlightEvent.LAND_CMD): FlightPhase.LANDING,
    (FlightPhase.FLYING, FlightEvent.ABORT): FlightPhase.LANDING,
    (FlightPhase.LANDING, FlightEvent.TOUCHDOWN): FlightPhase.ON_GROUND,
}


def fsm_step(phase: FlightPhase, event: FlightEvent) -> tuple[FlightPhase, bool]:
    """Next phase plus whether the event was legal in this phase."""
    nxt = _TRANSITIONS.get((phase, event))
    if nxt is None:
        return phase, False
    return nxt, True


def on_ground_guard(phase: FlightPhase) -> bool:
    """Motor-enable flag: powered off exactly in the on-ground phase."""
    return phase is not FlightPhase.ON_GROUND
