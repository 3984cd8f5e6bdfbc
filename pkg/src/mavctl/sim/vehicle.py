"""Rigid-body kinematics of the quadrotor plus the simulated inner loop.

The real platform's flight management unit closes the attitude and vertical
speed loops onboard; here that inner loop is a pair of first-order lags.
Horizontal acceleration follows the tilt (g * tan), opposed by linear drag
relative to the air mass, which makes constant wind a bounded disturbance
with terminal drift equal to the wind speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..util import GRAVITY, euler_to_matrix, wrap_angle
from .world import WindSpec


@dataclass(frozen=True)
class InnerLoopLimits:
    max_tilt: float = 0.35  # rad
    max_vz: float = 1.0  # m/s
    max_yaw_rate: float = 1.0  # rad/s


@dataclass(frozen=True)
class InnerLoopSetpoint:
    roll: float = 0.0
    pitch: float = 0.0
    vz: float = 0.0
    yaw_rate: float = 0.0

    def clamped(self, limits: InnerLoopLimits) -> "InnerLoopSetpoint":
        return InnerLoopSetpoint(
            roll=max(-limits.max_tilt, min(limits.max_tilt, self.roll)),
            pitch=max(-limits.max_tilt, min(limits.max_tilt, self.pitch)),
            vz=max(-limits.max_vz, min(limits.max_vz, self.vz)),
            yaw_rate=max(-limits.max_yaw_rate, min(limits.max_yaw_rate, self.yaw_rate)),
        )


@dataclass(frozen=True)
class DynamicsParams:
    tau_attitude: float = 0.15  # s, roll/pitch/yaw-rate lag
    tau_vz: float = 0.3  # s, vertical velocity lag
    k_drag: float = 0.3  # 1/s, linear horizontal drag vs air mass
    limits: InnerLoopLimits = field(default_factory=InnerLoopLimits)


@dataclass(frozen=True)
class VehicleTruth:
    """Ground-truth kinematic state. z is up, yaw follows the world XY plane."""

    position: np.ndarray  # (3,) m
    velocity: np.ndarray  # (3,) m/s world frame
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0
    roll_rate: float = 0.0
    pitch_rate: float = 0.0
    yaw_rate: float = 0.0
    accel_world: np.ndarray = field(default_factory=lambda: np.zeros(3))
    battery_fraction: float = 1.0

    @staticmethod
    def at(x: float = 0.0, y: float = 0.0, z: float = 0.0, yaw: float = 0.0) -> "VehicleTruth":
        return VehicleTruth(position=np.array([x, y, z]), velocity=np.zeros(3), yaw=yaw)

    def rotation(self) -> np.ndarray:
        return euler_to_matrix(self.roll, self.pitch, self.yaw)

    def imu_specific_force(self) -> np.ndarray:
        """Body-frame accelerometer reading: rotated world accel minus gravity.

        A vehicle at rest reads (0, 0, -g) in this convention; the estimation
        side adds the gravity column back after rotating to the world frame.
        """
        g_world = np.array([0.0, 0.0, -GRAVITY])
        return self.rotation().T @ (self.accel_world + g_world)


def step_dynamics(
    truth: VehicleTruth,
    setpoint: InnerLoopSetpoint,
    wind: WindSpec,
    dt: float,
    t: float = 0.0,
    params: DynamicsParams = DynamicsParams(),
    endurance_s: float = math.inf,
) -> VehicleTruth:
    """Advance the truth state by one tick with motors on.

    Attitude and vertical speed track their setpoints through exact
    exponential first-order lags; position integrates semi-implicitly.
    dt must stay at or below 20 ms so the Euler velocity step is benign.
    """
    if not 0.0 < dt <= 0.02:
        raise ValueError(f"dt must be in (0, 0.02], got {dt}")

    sp = setpoint.clamped(params.limits)

    k_att = 1.0 - math.exp(-dt / params.tau_attitude)
    roll = truth.roll + k_att * (sp.roll - truth.roll)
    pitch = truth.pitch + k_att * (sp.pitch - truth.pitch)
    yaw_rate = truth.yaw_rate + k_att * (sp.yaw_rate - truth.yaw_rate)
    yaw = wrap_angle(truth.yaw + yaw_rate * dt)

    # Tilt-proportional thrust projection: pitch forward, roll to the left.
    ax_body = GRAVITY * math.tan(pitch)
    ay_body = -GRAVITY * math.tan(roll)
    c, s = math.cos(yaw), math.sin(yaw)
    accel = np.array([c * ax_body - s * ay_body, s * ax_body + c * ay_body, 0.0])

    air = wind.velocity(t)
    accel[0] += params.k_drag * (air[0] - truth.velocity[0])
    accel[1] += params.k_drag * (air[1] - truth.velocity[1])

    vx = truth.velocity[0] + accel[0] * dt
    vy = truth.velocity[1] + accel[1] * dt

    k_vz = 1.0 - math.exp(-dt / params.tau_vz)
    vz = truth.velocity[2] + k_vz * (sp.vz - truth.velocity[2]) + params.k_drag * air[2] * dt

    position = truth.position + np.array([vx, vy, vz]) * dt
    if position[2] <= 0.0:
        position = position.copy()
        position[2] = 0.0
        if vz < 0.0:
            vz = 0.0
        # Ground contact also kills horizontal motion (skid friction).
        vx = 0.0
        vy = 0.0

    velocity = np.array([vx, vy, vz])
    accel_world = (velocity - truth.velocity) / dt

    battery = max(0.0, truth.battery_fraction - dt / endurance_s)

    return VehicleTruth(
        position=position,
        velocity=velocity,
        roll=roll,
        pitch=pitch,
        yaw=yaw,
        roll_rate=(roll - truth.roll) / dt,
        pitch_rate=(pitch - truth.pitch) / dt,
        yaw_rate=yaw_rate,
        accel_world=accel_world,
        battery_fraction=battery,
    )
