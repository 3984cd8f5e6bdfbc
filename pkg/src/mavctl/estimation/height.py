"""Height Kalman filter: fuses rangefinder and biased barometer.

State [z, vz, baro_bias]. The rangefinder observes z directly (with a 5-sigma
innovation gate against floor-structure step edges); the barometer observes
z + bias, which lets the filter estimate the drifting baro bias whenever both
sources are present.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class HeightConfig:
    sigma_baro: float = 0.04
    sigma_range: float = 0.01
    q_z: float = 1e-6  # m^2/s, direct height process noise
    q_vz: float = 0.25  # (m/s)^2/s, vertical velocity random walk
    q_bias: float = 2.5e-5  # m^2/s, matches baro bias walk (0.005/sqrt(s))^2
    range_gate_sigmas: float = 5.0
    # After this many consecutive gated-out rangefinder frames the reading is
    # no longer a one-frame step edge: the height variance is inflated and the
    # measurement accepted, so a persistent floor-level change is adopted in
    # bounded time instead of being rejected forever.
    gate_reopen_frames: int = 20
    gate_reopen_inflation: float = 0.005  # m^2 added before the forced accept
    p0: float = 1.0


@dataclass
class HeightFilter:
    config: HeightConfig = field(default_factory=HeightConfig)
    x: np.ndarray = field(init=False)
    P: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.x = np.zeros(3)
        self.P = np.eye(3) * self.config.p0
        self._range_rejections = 0

    @property
    def height(self) -> float:
        return float(self.x[0])

    @property
    def vertical_velocity(self) -> float:
        return float(self.x[1])

    @property
    def baro_bias(self) -> float:
        return float(self.x[2])

    def predict(self, dt: float) -> None:
        if dt <= 0.0:
            raise ValueError(f"dt must be > 0, got {dt}")
        f = np.array([[1.0, dt, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        q = np.diag([self.config.q_z * dt, self.config.q_vz * dt, self.config.q_bias * dt])
        self.x = f @ self.x
        self.P = f @ self.P @ f.T + q

    def _scalar_update(self, innovation: float, h: np.ndarray, r: float) -> None:
        s = float(h @ self.P @ h) + r
        k = (self.P @ h) / s
        self.x = self.x + k * innovation
        ikh = np.eye(3) - np.outer(k, h)
        self.P = ikh @ self.P @ ikh.T + r * np.outer(k, k)  # Joseph form
        self.P = 0.5 * (self.P + self.P.T)

    def update_baro(self, baro_z: float) -> None:
        h = np.array([1.0, 0.0, 1.0])
        self._scalar_update(baro_z - float(h @ self.x), h, self.config.sigma_baro**2)

    def update_range(self, height: float) -> bool:
        """Rangefinder update; returns False when gated out as an outlier."""
        h = np.array([1.0, 0.0, 0.0])
        innovation = height - float(h @ self.x)
        s = float(h @ self.P @ h) + self.config.sigma_range**2
        if abs(innovation) > self.config.range_gate_sigmas * math.sqrt(s):
            self._range_rejections += 1
            if self._range_rejections < self.config.gate_reopen_frames:
                return False
            self.P[0, 0] += self.config.gate_reopen_inflation
        self._range_rejections = 0
        self._scalar_update(innovation, h, self.config.sigma_range**2)
        return True

    def step(self, dt: float, baro_z: float | None, height_down: float | None) -> None:
        self.predict(dt)
        if height_down is not None:
            self.update_range(height_down)
        if baro_z is not None:
            self.update_baro(baro_z)
