"""Fixed-step simulator: dynamics, wind, battery, and sensor schedules."""

from __future__ import annotations

import numpy as np

from .sensors import SensorFrame, SensorSampler
from .vehicle import DynamicsParams, InnerLoopSetpoint, VehicleTruth, step_dynamics
from .world import WorldModel

SIM_DT = 0.01


class Simulator:
    """Owns ground truth and advances it one 10 ms tick at a time."""

    def __init__(
        self,
        world: WorldModel,
        seed: int,
        start: VehicleTruth | None = None,
        params: DynamicsParams = DynamicsParams(),
    ):
        self.world = world
        self.params = params
        self.truth = start if start is not None else VehicleTruth.at(0.0, 0.0, 0.0, 0.0)
        self.sensors = SensorSampler(world, seed)
        self.t = 0.0

    def step(self, setpoint: InnerLoopSetpoint, motors_on: bool = True) -> SensorFrame:
        endurance = self.world.battery.hover_endurance_s if motors_on else np.inf
        self.truth = step_dynamics(
            self.truth,
            setpoint,
            self.world.wind,
            SIM_DT,
            t=self.t,
            params=self.params,
            endurance_s=endurance,
        )
        self.t += SIM_DT
        return self.sensors.sample(self.truth, self.t)

    def nearest_obstacle_distance(self) -> float:
        p = self.truth.position
        d, _ = self.world.nearest_obstacle(float(p[0]), float(p[1]), float(p[2]))
        return d
