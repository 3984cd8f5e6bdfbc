"""Small planar-geometry and angle helpers shared across the stack."""

from __future__ import annotations

import math

import numpy as np

GRAVITY = 9.81  # m/s^2


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    return math.pi - (math.pi - a) % (2.0 * math.pi)


def wrap_angle_array(a: np.ndarray) -> np.ndarray:
    return np.pi - np.mod(np.pi - np.asarray(a, dtype=float), 2.0 * np.pi)


def rot2(psi: float) -> np.ndarray:
    """2x2 rotation matrix: body -> world for heading psi."""
    c, s = math.cos(psi), math.sin(psi)
    return np.array([[c, -s], [s, c]])


def rotate2(v: np.ndarray, psi: float) -> np.ndarray:
    c, s = math.cos(psi), math.sin(psi)
    x, y = float(v[0]), float(v[1])
    return np.array([c * x - s * y, s * x + c * y])


def euler_to_matrix(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Body -> world rotation for Z-Y-X (yaw, pitch, roll) Euler angles."""
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    return np.array(
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    )


def clamp(x: float, lo: float, hi: float) -> float:
    return max(lo, min(hi, x))


def clamp_norm(v: np.ndarray, limit: float) -> np.ndarray:
    """Scale a vector down so its Euclidean norm does not exceed limit."""
    n = float(np.linalg.norm(v))
    if n <= limit or n == 0.0:
        return v
    return v * (limit / n)
