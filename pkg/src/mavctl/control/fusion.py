"""Behavior fusion: one safe velocity command per control tick.

Arbitration order: the single active intention (cooperative-additive)
forms the base; override outputs add their repulsion and constrain the
horizontal direction through their published wedge; limit outputs cap
the climb rate last; everything is clamped to the velocity envelope.
A hold verdict drops the intention but keeps the safety terms, so the
platform still backs away from obstacles while holding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..behaviors import (
    Arbitration,
    BehaviorLimits,
    BehaviorOutput,
    ViabilityVerdict,
    project_onto_wedge,
)
from ..util import clamp, clamp_norm


class DuplicateIntentionError(ValueError):
    """More than one intention behavior claimed the tick."""


@dataclass(frozen=True)
class FusedCommand:
    vx: float = 0.0
    vy: float = 0.0
    vz: float = 0.0
    yaw_rate: float = 0.0
    contributors: tuple[tuple[str, float], ...] = ()

    @property
    def horizontal(self) -> np.ndarray:
        return np.array([self.vx, self.vy])


HOLD_COMMAND = FusedCommand()


def fuse(
    outputs: list[BehaviorOutput],
    verdict: ViabilityVerdict,
    limits: BehaviorLimits = BehaviorLimits(),
) -> FusedCommand:
    active = [o for o in outputs if o.active]
    additive = [o for o in active if o.arbitration is Arbitration.COOPERATIVE_ADDITIVE]
    if len(additive) > 1:
        names = ", ".join(o.name for o in additive)
        raise DuplicateIntentionError(f"conflicting intention behaviors: {names}")

    velocity = np.zeros(3)
    yaw_rate = 0.0
    if additive and verdict is not ViabilityVerdict.HOLD:
        velocity = np.asarray(additive[0].velocity, dtype=float).copy()
        yaw_rate = additive[0].yaw_rate

    for o in active:
        if o.arbitration is Arbitration.COMPETITIVE_OVERRIDE:
            velocity += np.asarray(o.velocity, dtype=float)
            if o.away_wedge is not None:
                velocity[:2] = project_onto_wedge(velocity[:2], o.away_wedge)
    for o in active:
        if o.arbitration is Arbitration.COMPETITIVE_LIMIT and o.vz_cap is not None:
            velocity[2] = min(velocity[2], o.vz_cap)

    horiz = clamp_norm(velocity[:2], limits.v_max)
    vz = clamp(float(velocity[2]), -limits.vz_max, limits.vz_max)
    return FusedCommand(
        vx=float(horiz[0]),
        vy=float(horiz[1]),
        vz=vz,
        yaw_rate=yaw_rate,
        contributors=tuple((o.name, o.activation) for o in active),
    )
