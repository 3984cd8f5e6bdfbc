"""Scalar PID with output clamping and integral anti-windup."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..util import clamp


@dataclass
class PidController:
    kp: float
    ki: float = 0.0
    kd: float = 0.0
    output_limit: float = math.inf
    integral_limit: float = math.inf
    integral: float = 0.0
    last_error: float | None = None

    def reset(self) -> None:
        self.integral = 0.0
        self.last_error = None

    def step(self, error: float, dt: float) -> float:
        if dt <= 0.0:
            raise ValueError(f"dt must be positive, got {dt}")
        self.integral = clamp(
            self.integral + error * dt, -self.integral_limit, self.integral_limit
        )
        derivative = 0.0 if self.last_error is None else (error - self.last_error) / dt
        self.last_error = error
        out = self.kp * error + self.ki * self.integral + self.kd * derivative
        return clamp(out, -self.output_limit, self.output_limit)
