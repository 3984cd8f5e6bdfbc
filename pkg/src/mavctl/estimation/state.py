"""Full estimated kinematic state published to the control stack."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class VehicleState:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0
    vx: float = 0.0  # world frame, m/s
    vy: float = 0.0
    vz: float = 0.0
    ax: float = 0.0  # world frame, gravity removed, m/s^2
    ay: float = 0.0
    az: float = 0.0
    roll_rate: float = 0.0
    pitch_rate: float = 0.0
    yaw_rate: float = 0.0
    t: float = 0.0

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def velocity(self) -> np.ndarray:
        return np.array([self.vx, self.vy, self.vz])


@dataclass
class StateCovariances:
    """Covariance snapshots alongside a published state, for telemetry."""

    local: np.ndarray = field(default_factory=lambda: np.zeros((7, 7)))
    global_: np.ndarray = field(default_factory=lambda: np.zeros((4, 4)))
