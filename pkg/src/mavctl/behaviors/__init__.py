from .motion import (
    attenuated_go,
    attenuated_inspect,
    attenuation,
    limit_max_height,
    prevent_collision,
    project_onto_wedge,
)
from .types import (
    Arbitration,
    BehaviorContext,
    BehaviorLimits,
    BehaviorOutput,
    ViabilityVerdict,
)
from .viability import check_flight_viability

__all__ = [
    "Arbitration",
    "BehaviorContext",
    "BehaviorLimits",
    "BehaviorOutput",
    "ViabilityVerdict",
    "attenuated_go",
    "attenuated_inspect",
    "attenuation",
    "check_flight_viability",
    "limit_max_height",
    "prevent_collision",
    "project_onto_wedge",
]
