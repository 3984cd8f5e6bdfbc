"""Estimation pipeline: preprocessing -> matcher -> filters -> EKF cascade.

Consumes raw SensorFrames tick by tick and publishes a VehicleState. Pure
state-transition code: identical frame sequences produce identical states.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..sim.sensors import SensorFrame
from ..util import rot2, wrap_angle
from .ekf import GlobalEkf, GlobalEkfConfig, LocalEkf, LocalEkfConfig
from .height import HeightConfig, HeightFilter
from .matcher import MatcherConfig, ScanMatchResult, match_scans
from .preprocess import PreprocessedFrame, preprocess
from .state import VehicleState
from .velocity import VelocityConfig, VelocityFusion


@dataclass(frozen=True)
class PipelineConfig:
    matcher: MatcherConfig = field(default_factory=MatcherConfig)
    height: HeightConfig = field(default_factory=HeightConfig)
    velocity: VelocityConfig = field(default_factory=VelocityConfig)
    local: LocalEkfConfig = field(default_factory=LocalEkfConfig)
    global_: GlobalEkfConfig = field(default_factory=GlobalEkfConfig)


class EstimationPipeline:
    def __init__(self, config: PipelineConfig = PipelineConfig()):
        self.config = config
        self.height_filter = HeightFilter(config.height)
        self.velocity = VelocityFusion(config.velocity)
        self.local = LocalEkf(config.local)
        self.global_ = GlobalEkf(config.global_)
        self.prev_scan = None
        self.prev_scan_yaw = 0.0
        self.last_match = ScanMatchResult(0.0, 0.0, 0.0, 0.0, False)
        self.last_state = VehicleState()
        self._last_local_pose = self.local.pose
        self._last_t: float | None = None
        self._gyro_psi_accum = 0.0
        self._uwb_locked = False

    def update(self, frame: SensorFrame) -> VehicleState:
        pre = preprocess(frame)
        dt = 0.01 if self._last_t is None else max(1e-6, frame.t - self._last_t)
        self._last_t = frame.t

        if pre.usable:
            self._ingest(pre, dt)
        else:
            self.height_filter.predict(dt)
            self.local.predict(dt)
            self.global_.predict_with_delta(self.local.pose - self._last_local_pose, dt)
            self._last_local_pose = self.local.pose

        gx, gy, gz, gpsi = self.global_.x
        vel = self.local.velocity
        self.last_state = VehicleState(
            x=float(gx),
            y=float(gy),
            z=float(gz),
            roll=pre.roll,
            pitch=pre.pitch,
            yaw=float(wrap_angle(gpsi)),
            vx=float(vel[0]),
            vy=float(vel[1]),
            vz=float(vel[2]),
            ax=float(pre.accel_world[0]),
            ay=float(pre.accel_world[1]),
            az=float(pre.accel_world[2]),
            roll_rate=float(pre.gyro[0]),
            pitch_rate=float(pre.gyro[1]),
            yaw_rate=float(pre.gyro[2]),
            t=frame.t,
        )
        return self.last_state

    def _ingest(self, pre: PreprocessedFrame, dt: float) -> None:
        self.height_filter.step(dt, pre.baro_z, pre.height_down)

        self.velocity.propagate(pre.accel_world, dt)
        self._gyro_psi_accum += float(pre.gyro[2]) * dt
        if pre.laser is not None:
            if self.prev_scan is not None:
                guess_t = rot2(-self.prev_scan_yaw) @ (self.velocity.v * (pre.laser.t - self.prev_scan.t))
                guess = (float(guess_t[0]), float(guess_t[1]), self._gyro_psi_accum)
                match = match_scans(self.prev_scan, pre.laser, guess, self.config.matcher)
                self.last_match = match
                self.velocity.correct(match, self.prev_scan_yaw, pre.laser.t - self.prev_scan.t)
            self.prev_scan = pre.laser
            self.prev_scan_yaw = pre.yaw
            self._gyro_psi_accum = 0.0

        self.local.predict(dt)
        self.local.update_velocity(float(self.velocity.v[0]), float(self.velocity.v[1]))
        self.local.update_height(self.height_filter.height, self.height_filter.vertical_velocity)
        self.local.update_yaw(pre.yaw)

        delta = self.local.pose - self._last_local_pose
        delta[3] = wrap_angle(delta[3])
        self.global_.predict_with_delta(delta, dt)
        self._last_local_pose = self.local.pose
        if pre.uwb is not None:
            fix = np.asarray(pre.uwb, dtype=float)
            if self._uwb_locked:
                self.global_.update_uwb(fix)
            else:
                self.global_.reset_position(fix)
                self._uwb_locked = True

    @property
    def degraded(self) -> bool:
        return self.velocity.degraded or self.global_.diverged
