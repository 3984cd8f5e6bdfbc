from .fsm import (
    FlightEvent,
    FlightParams,
    FlightPhase,
    fsm_step,
    on_ground_guard,
)
from .fusion import DuplicateIntentionError, FusedCommand, HOLD_COMMAND, fuse
from .pid import PidController
from .velocity_loop import ControlGains, VelocityController

__all__ = [
    "ControlGains",
    "DuplicateIntentionError",
    "FlightEvent",
    "FlightParams",
    "FlightPhase",
    "FusedCommand",
    "HOLD_COMMAND",
    "PidController",
    "VelocityController",
    "fsm_step",
    "fuse",
    "on_ground_guard",
]
