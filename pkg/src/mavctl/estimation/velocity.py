"""Horizontal velocity from scan matching blended with IMU integration.

Classic complementary structure: the IMU path integrates world-frame
acceleration every tick (high bandwidth, drifts), and each converged scan
match pulls the estimate toward displacement/dt (drift-free, 10 Hz). The
vertical axis belongs to the height filter.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..util import rotate2
from .matcher import ScanMatchResult


@dataclass(frozen=True)
class VelocityConfig:
    alpha: float = 0.95  # IMU weight at each scan-match correction
    degraded_after_s: float = 0.3  # no converged match for this long => degraded


@dataclass
class VelocityFusion:
    config: VelocityConfig = field(default_factory=VelocityConfig)
    v: np.ndarray = field(default_factory=lambda: np.zeros(2))  # world frame
    initialized: bool = False
    since_match_s: float = 0.0

    def propagate(self, accel_world: np.ndarray, dt: float) -> None:
        """IMU-only step, runs every tick."""
        self.v = self.v + accel_world[:2] * dt
        self.since_match_s += dt

    def correct(self, match: ScanMatchResult, yaw_prev: float, dt_scan: float) -> None:
        """Blend in one scan match; the match translation lives in the
        previous scan's body frame."""
        if not match.converged or dt_scan <= 0.0:
            return
        v_scan = rotate2(match.translation, yaw_prev) / dt_scan
        if not self.initialized:
            self.v = v_scan.copy()
            self.initialized = True
        else:
            a = self.config.alpha
            self.v = a * self.v + (1.0 - a) * v_scan
        self.since_match_s = 0.0

    @property
    def degraded(self) -> bool:
        return self.since_match_s > self.config.degraded_after_s
