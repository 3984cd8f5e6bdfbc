"""Planar laser scanner emulation by ray casting against world segments.

The scanner mechanically stabilizes its beams onto the horizontal plane for
the tilts the vehicle can reach (|roll|, |pitch| < 0.35 rad), so every ray is
cast in the plane z = vehicle height and intersected with the wall and box
segments that span that height.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .vehicle import VehicleTruth
from .world import WorldModel

NO_RETURN = np.inf


@dataclass(frozen=True)
class LaserScan:
    angle_min: float  # rad, relative to body +x
    angle_increment: float
    max_range: float
    ranges: np.ndarray  # (N,), NO_RETURN where nothing came back
    t: float = 0.0

    @property
    def angles(self) -> np.ndarray:
        return self.angle_min + self.angle_increment * np.arange(len(self.ranges))

    def valid_mask(self) -> np.ndarray:
        return np.isfinite(self.ranges) & (self.ranges > 0.0)


@dataclass(frozen=True)
class LaserConfig:
    fov: float = np.deg2rad(270.0)
    angle_increment: float = np.deg2rad(0.25)
    max_range: float = 20.0

    @property
    def num_beams(self) -> int:
        return int(round(self.fov / self.angle_increment)) + 1

    @property
    def angle_min(self) -> float:
        return -self.fov / 2.0


def raw_ranges(
    x: float,
    y: float,
    z: float,
    yaw: float,
    world: WorldModel,
    config: LaserConfig,
) -> np.ndarray:
    """Noise-free ray ranges for a pose, NO_RETURN past max_range."""
    segments = world.active_segments(z)
    n = config.num_beams
    angles = yaw + config.angle_min + config.angle_increment * np.arange(n)
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)  # (n, 2)
    if segments.shape[0] == 0:
        return np.full(n, NO_RETURN)

    p = np.array([x, y])
    a = segments[:, 0:2]  # (m, 2)
    s = segments[:, 2:4] - a  # segment direction vectors

    # Ray p + t*d vs segment a + u*s: solve with 2D cross products.
    # denom = d x s ; t = (a - p) x s / denom ; u = (a - p) x d / denom
    ap = a - p  # (m, 2)
    denom = dirs[:, 0, None] * s[None, :, 1] - dirs[:, 1, None] * s[None, :, 0]  # (n, m)
    cross_ap_s = ap[:, 0] * s[:, 1] - ap[:, 1] * s[:, 0]  # (m,)
    cross_ap_d = ap[None, :, 0] * dirs[:, 1, None] - ap[None, :, 1] * dirs[:, 0, None]  # (n, m)

    with np.errstate(divide="ignore", invalid="ignore"):
        t = cross_ap_s[None, :] / denom
        u = cross_ap_d / denom
    hit = (np.abs(denom) > 1e-12) & (t > 1e-9) & (u >= 0.0) & (u <= 1.0)
    t = np.where(hit, t, np.inf)
    ranges = t.min(axis=1)
    ranges[ranges > config.max_range] = NO_RETURN
    return ranges


def cast_laser_scan(
    truth: VehicleTruth,
    world: WorldModel,
    config: LaserConfig = LaserConfig(),
    rng: np.random.Generator | None = None,
    sigma: float = 0.0,
    t: float = 0.0,
) -> LaserScan:
    """Cast a full scan from the vehicle pose, with optional Gaussian range noise."""
    ranges = raw_ranges(
        float(truth.position[0]),
        float(truth.position[1]),
        float(truth.position[2]),
        truth.yaw,
        world,
        config,
    )
    if rng is not None and sigma > 0.0:
        noise = rng.normal(0.0, sigma, size=len(ranges))
        returned = np.isfinite(ranges)
        ranges = ranges.copy()
        ranges[returned] = np.clip(ranges[returned] + noise[returned], 0.01, config.max_range)
    return LaserScan(
        angle_min=config.angle_min,
        angle_increment=config.angle_increment,
        max_range=config.max_range,
        ranges=ranges,
        t=t,
    )
