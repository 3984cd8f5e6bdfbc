"""Sensor sampling at per-sensor rates with seeded noise.

The simulator ticks at 100 Hz; each sensor fires on its own divisor of that
rate. A frame holds whatever fired on the current tick, with None for the
sensors that stayed quiet.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..util import wrap_angle
from .laser import LaserConfig, LaserScan, cast_laser_scan
from .vehicle import VehicleTruth
from .world import WorldModel

SIM_RATE_HZ = 100
LASER_DIV = 10  # 10 Hz
RANGE_DIV = 5  # 20 Hz
BARO_DIV = 5  # 20 Hz
UWB_DIV = 20  # 5 Hz


@dataclass(frozen=True)
class ImuSample:
    accel: np.ndarray  # body specific force, m/s^2; level at rest reads (0, 0, -g)
    gyro: np.ndarray  # body rates, rad/s
    roll: float  # attitude estimate from the autopilot's own fusion
    pitch: float
    yaw: float
    t: float


@dataclass(frozen=True)
class SensorFrame:
    """Everything that fired on one simulator tick."""

    t: float
    imu: ImuSample
    laser: LaserScan | None = None
    range_down: float | None = None  # slant range to floor, inf if lost
    range_up: float | None = None  # slant range to ceiling
    baro_z: float | None = None  # barometric height, biased
    uwb: np.ndarray | None = None  # (3,) position fix in the world frame


class SensorSampler:
    """Generates sensor frames from ground truth on a fixed schedule."""

    def __init__(
        self,
        world: WorldModel,
        seed: int,
        laser_config: LaserConfig = LaserConfig(),
        max_range_vertical: float = 8.0,
    ):
        self.world = world
        self.rng = np.random.default_rng(seed)
        self.laser_config = laser_config
        self.max_range_vertical = max_range_vertical
        self.baro_bias = 0.0
        self.tick = 0

    def _slant_range(self, truth: VehicleTruth, clearance: float) -> float:
        # Fixed-boresight rangefinder along body z: slant = clearance / (cos r * cos p)
        c = np.cos(truth.roll) * np.cos(truth.pitch)
        if c < 0.2 or clearance < 0.0:
            return np.inf
        slant = clearance / c
        return slant if slant <= self.max_range_vertical else np.inf

    def sample(self, truth: VehicleTruth, t: float) -> SensorFrame:
        noise = self.world.sensor_noise
        rng = self.rng

        accel = truth.imu_specific_force() + rng.normal(0.0, noise["imu_accel"].sigma, 3)
        gyro = (
            np.array([truth.roll_rate, truth.pitch_rate, truth.yaw_rate])
            + rng.normal(0.0, noise["imu_gyro"].sigma, 3)
        )
        att_sigma = noise["imu_attitude"].sigma
        imu = ImuSample(
            accel=accel,
            gyro=gyro,
            roll=truth.roll + rng.normal(0.0, att_sigma),
            pitch=truth.pitch + rng.normal(0.0, att_sigma),
            yaw=wrap_angle(truth.yaw + rng.normal(0.0, att_sigma)),
            t=t,
        )

        laser = None
        if self.tick % LASER_DIV == 0:
            laser = cast_laser_scan(
                truth,
                self.world,
                self.laser_config,
                rng=rng,
                sigma=noise["laser"].sigma,
                t=t,
            )

        range_down = None
        range_up = None
        if self.tick % RANGE_DIV == 0:
            z = float(truth.position[2])
            down = self._slant_range(truth, z)
            if np.isfinite(down):
                down = max(0.0, down + rng.normal(0.0, noise["range_down"].sigma))
            up = self._slant_range(truth, self.world.ceiling_height - z)
            if np.isfinite(up):
                up = max(0.0, up + rng.normal(0.0, noise["range_up"].sigma))
            range_down = float(down)
            range_up = float(up)

        baro_z = None
        if self.tick % BARO_DIV == 0:
            spec = noise["baro"]
            dt_baro = BARO_DIV / SIM_RATE_HZ
            self.baro_bias += rng.normal(0.0, spec.bias_walk_sigma * np.sqrt(dt_baro))
            baro_z = float(truth.position[2]) + self.baro_bias + rng.normal(0.0, spec.sigma)

        uwb = None
        if self.tick % UWB_DIV == 0:
            uwb = truth.position + rng.normal(0.0, noise["uwb"].sigma, 3)

        self.tick += 1
        return SensorFrame(
            t=t,
            imu=imu,
            laser=laser,
            range_down=range_down,
            range_up=range_up,
            baro_z=baro_z,
            uwb=uwb,
        )
