"""Local and global extended Kalman filters.

The local filter fuses odometric sources (fused velocity, height, yaw) around
a constant-velocity model; its position is dead reckoning. The global filter
tracks the local pose through deltas and anchors it with absolute UWB fixes,
gated at 3 sigma. Without fixes the global pose is the local pose plus the
initial offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..util import wrap_angle

# Local state layout
LX, LY, LZ, LVX, LVY, LVZ, LPSI = range(7)
# Global state layout
GX, GY, GZ, GPSI = range(4)


def _joseph_update(
    x: np.ndarray,
    p: np.ndarray,
    innovation: np.ndarray,
    h: np.ndarray,
    r: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    s = h @ p @ h.T + r
    k = p @ h.T @ np.linalg.inv(s)
    x = x + k @ innovation
    ikh = np.eye(len(x)) - k @ h
    p = ikh @ p @ ikh.T + k @ r @ k.T
    return x, 0.5 * (p + p.T)


@dataclass(frozen=True)
class LocalEkfConfig:
    q_pos: float = 1e-6  # m^2/s
    q_vel: float = 0.05  # (m/s)^2/s
    q_psi: float = 1e-4  # rad^2/s
    r_vel: float = 0.02**2  # fused-velocity measurement variance
    r_height: float = 0.02**2
    r_vz: float = 0.05**2
    r_psi: float = 0.004**2
    p0: float = 0.5


@dataclass
class LocalEkf:
    config: LocalEkfConfig = field(default_factory=LocalEkfConfig)
    x: np.ndarray = field(init=False)
    P: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.x = np.zeros(7)
        self.P = np.eye(7) * self.config.p0

    def predict(self, dt: float) -> None:
        f = np.eye(7)
        f[LX, LVX] = dt
        f[LY, LVY] = dt
        f[LZ, LVZ] = dt
        c = self.config
        q = np.diag(
            [c.q_pos * dt, c.q_pos * dt, c.q_pos * dt, c.q_vel * dt, c.q_vel * dt, c.q_vel * dt, c.q_psi * dt]
        )
        self.x = f @ self.x
        self.x[LPSI] = wrap_angle(self.x[LPSI])
        self.P = f @ self.P @ f.T + q

    def update_velocity(self, vx: float, vy: float) -> None:
        h = np.zeros((2, 7))
        h[0, LVX] = 1.0
        h[1, LVY] = 1.0
        innovation = np.array([vx, vy]) - h @ self.x
        self.x, self.P = _joseph_update(self.x, self.P, innovation, h, np.eye(2) * self.config.r_vel)

    def update_height(self, z: float, vz: float) -> None:
        h = np.zeros((2, 7))
        h[0, LZ] = 1.0
        h[1, LVZ] = 1.0
        innovation = np.array([z, vz]) - h @ self.x
        r = np.diag([self.config.r_height, self.config.r_vz])
        self.x, self.P = _joseph_update(self.x, self.P, innovation, h, r)

    def update_yaw(self, psi: float) -> None:
        h = np.zeros((1, 7))
        h[0, LPSI] = 1.0
        innovation = np.array([wrap_angle(psi - self.x[LPSI])])
        self.x, self.P = _joseph_update(
            self.x, self.P, innovation, h, np.array([[self.config.r_psi]])
        )
        self.x[LPSI] = wrap_angle(self.x[LPSI])

    @property
    def pose(self) -> np.ndarray:
        """(x, y, z, psi)"""
        return np.array([self.x[LX], self.x[LY], self.x[LZ], self.x[LPSI]])

    @property
    def velocity(self) -> np.ndarray:
        return self.x[LVX : LVZ + 1].copy()


@dataclass(frozen=True)
class GlobalEkfConfig:
    q_pos: float = 5e-4  # m^2/s, drift rate attributed to dead reckoning
    q_psi: float = 1e-5
    r_uwb: float = 0.15**2
    gate_sigmas: float = 3.0
    p0: float = 0.5
    cov_trace_cap: float = 50.0


@dataclass
class GlobalEkf:
    config: GlobalEkfConfig = field(default_factory=GlobalEkfConfig)
    x: np.ndarray = field(init=False)
    P: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.x = np.zeros(4)
        self.P = np.eye(4) * self.config.p0

    def predict_with_delta(self, delta_pose: np.ndarray, dt: float) -> None:
        """Advance by the local filter's pose increment (x, y, z, psi)."""
        self.x = self.x + delta_pose
        self.x[GPSI] = wrap_angle(self.x[GPSI])
        c = self.config
        self.P = self.P + np.diag([c.q_pos * dt, c.q_pos * dt, c.q_pos * dt, c.q_psi * dt])

    def reset_position(self, fix: np.ndarray) -> None:
        """Cold-start the position block from the first absolute fix.

        Before any fix arrives the pose is purely dead-reckoned from an
        arbitrary origin, so the innovation gate would reject every fix
        when the true start is far from that origin.
        """
        self.x[GX : GZ + 1] = fix
        self.P[:3, :] = 0.0
        self.P[:, :3] = 0.0
        self.P[GX, GX] = self.P[GY, GY] = self.P[GZ, GZ] = self.config.r_uwb

    def update_uwb(self, fix: np.ndarray) -> bool:
        """Absolute position fix; returns False when gated out at 3 sigma."""
        h = np.zeros((3, 4))
        h[0, GX] = 1.0
        h[1, GY] = 1.0
        h[2, GZ] = 1.0
        innovation = fix - h @ self.x
        r = np.eye(3) * self.config.r_uwb
        s = h @ self.P @ h.T + r
        if np.any(np.abs(innovation) > self.config.gate_sigmas * np.sqrt(np.diag(s))):
            return False
        self.x, self.P = _joseph_update(self.x, self.P, innovation, h, r)
        return True

    @property
    def diverged(self) -> bool:
        return float(np.trace(self.P)) > self.config.cov_trace_cap
