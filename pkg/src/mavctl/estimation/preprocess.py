"""Sensor-frame conditioning: tilt compensation and gravity removal."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..sim.sensors import SensorFrame
from ..util import GRAVITY, euler_to_matrix

MAX_USABLE_TILT = 0.35  # rad


@dataclass(frozen=True)
class PreprocessedFrame:
    t: float
    usable: bool
    roll: float
    pitch: float
    yaw: float
    gyro: np.ndarray
    accel_world: np.ndarray  # gravity removed, world frame
    laser: object | None  # LaserScan, already cast in the horizontal plane
    height_down: float | None  # vertical distance to floor, m
    height_up: float | None  # vertical distance to ceiling, m
    baro_z: float | None
    uwb: np.ndarray | None


def preprocess(frame: SensorFrame) -> PreprocessedFrame:
    """Correct one raw frame using the IMU attitude.

    Slant ranges become vertical distances, accelerations are rotated to the
    world frame with gravity removed. A frame beyond the tilt envelope is
    flagged unusable so the filters run prediction-only.
    """
    imu = frame.imu
    roll, pitch, yaw = imu.roll, imu.pitch, imu.yaw
    usable = abs(roll) < MAX_USABLE_TILT and abs(pitch) < MAX_USABLE_TILT

    rotation = euler_to_matrix(roll, pitch, yaw)
    accel_world = rotation @ imu.accel + np.array([0.0, 0.0, GRAVITY])

    tilt_cos = math.cos(roll) * math.cos(pitch)

    def to_vertical(slant: float | None) -> float | None:
        if slant is None or not math.isfinite(slant):
            return None
        return slant * tilt_cos

    return PreprocessedFrame(
        t=frame.t,
        usable=usable,
        roll=roll,
        pitch=pitch,
        yaw=yaw,
        gyro=imu.gyro,
        accel_world=accel_world,
        laser=frame.laser,
        height_down=to_vertical(frame.range_down),
        height_up=to_vertical(frame.range_up),
        baro_z=frame.baro_z,
        uwb=frame.uwb,
    )
