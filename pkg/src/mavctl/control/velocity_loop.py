"""Outer velocity loop: fused commands to FMU inner-loop setpoints.

Two PIDs map body-frame velocity error to tilt setpoints; the vertical
channel passes through, except that a zero vz command arms an
altitude-hold PID on the height captured at that moment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..estimation.state import VehicleState
from ..sim.vehicle import InnerLoopSetpoint
from ..util import rot2
from .fusion import FusedCommand
from .pid import PidController


@dataclass(frozen=True)
class ControlGains:
    vel_kp: float = 0.3
    vel_ki: float = 0.05
    vel_kd: float = 0.02
    vel_integral_limit: float = 2.0
    alt_kp: float = 0.8
    alt_ki: float = 0.1
    alt_kd: float = 0.0
    alt_integral_limit: float = 1.0
    max_tilt: float = 0.35
    max_vz: float = 1.0
    stale_after_s: float = 0.2


class VelocityController:
    def __init__(self, gains: ControlGains = ControlGains()):
        self.gains = gains
        self.pid_vx = self._vel_pid()
        self.pid_vy = self._vel_pid()
        self.pid_alt = PidController(
            gains.alt_kp,
            gains.alt_ki,
            gains.alt_kd,
            output_limit=gains.max_vz,
            integral_limit=gains.alt_integral_limit,
        )
        self.hold_z: float | None = None

    def _vel_pid(self) -> PidController:
        g = self.gains
        return PidController(
            g.vel_kp,
            g.vel_ki,
            g.vel_kd,
            output_limit=g.max_tilt,
            integral_limit=g.vel_integral_limit,
        )

    def reset(self) -> None:
        self.pid_vx.reset()
        self.pid_vy.reset()
        self.pid_alt.reset()
        self.hold_z = None

    def step(
        self, cmd: FusedCommand, state: VehicleState, now: float, dt: float
    ) -> tuple[InnerLoopSetpoint, bool]:
        """One control tick; returns (setpoint, stale).

        A state older than the staleness budget zeroes the setpoints and
        resets the controller so no error integrates across the gap.
        """
        if now - state.t > self.gains.stale_after_s:
            self.reset()
            return InnerLoopSetpoint(), True

        v_body = rot2(-state.yaw) @ np.array([state.vx, state.vy])
        pitch = self.pid_vx.step(cmd.vx - float(v_body[0]), dt)
        roll = -self.pid_vy.step(cmd.vy - float(v_body[1]), dt)

        if cmd.vz == 0.0:
            if self.hold_z is None:
                self.hold_z = state.z
                self.pid_alt.reset()
            vz = self.pid_alt.step(self.hold_z - state.z, dt)
        else:
            self.hold_z = None
            vz = cmd.vz
        return InnerLoopSetpoint(roll=roll, pitch=pitch, vz=vz, yaw_rate=cmd.yaw_rate), False
