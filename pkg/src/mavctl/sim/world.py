"""World description: obstacle geometry, wind, sensor noise and battery.

Worlds are 2.5D: vertical walls extruded from polylines plus axis-aligned
boxes, under a flat ceiling. This is all the planar laser and the vertical
rangefinders can perceive, so richer geometry would be wasted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class WorldError(ValueError):
    """Malformed or inconsistent world document. Message carries the field path."""


@dataclass(frozen=True)
class WindSpec:
    constant: np.ndarray  # world-frame mean wind, m/s
    gust_amplitude: float = 0.0  # m/s, sinusoidal on top of the mean
    gust_period_s: float = 10.0

    def velocity(self, t: float) -> np.ndarray:
        """Wind velocity vector at sim time t. Deterministic (pure sinusoid)."""
        base = self.constant
        if self.gust_amplitude <= 0.0:
            return base.copy()
        norm = float(np.linalg.norm(base[:2]))
        if norm > 1e-9:
            direction = np.array([base[0] / norm, base[1] / norm, 0.0])
        else:
            direction = np.array([1.0, 0.0, 0.0])
        gust = self.gust_amplitude * math.sin(2.0 * math.pi * t / self.gust_period_s)
        return base + gust * direction


@dataclass(frozen=True)
class SensorNoise:
    sigma: float = 0.0
    bias_walk_sigma: float = 0.0  # random-walk driving sigma, units/sqrt(s)


#: Noise applied when the world file does not override a sensor.
DEFAULT_SENSOR_NOISE: dict[str, SensorNoise] = {
    "laser": SensorNoise(sigma=0.01),
    "range_down": SensorNoise(sigma=0.01),
    "range_up": SensorNoise(sigma=0.02),
    "baro": SensorNoise(sigma=0.04, bias_walk_sigma=0.005),
    "uwb": SensorNoise(sigma=0.15),
    "imu_accel": SensorNoise(sigma=0.03),
    "imu_gyro": SensorNoise(sigma=0.005),
    "imu_attitude": SensorNoise(sigma=0.004),
}


@dataclass(frozen=True)
class BatterySpec:
    hover_endurance_s: float = 1200.0
    low_threshold: float = 0.25


@dataclass(frozen=True)
class Wall:
    points: np.ndarray  # (N, 2) polyline vertices, m
    height: float


@dataclass(frozen=True)
class Box:
    lo: np.ndarray  # (3,)
    hi: np.ndarray  # (3,)


@dataclass
class WorldModel:
    walls: list[Wall]
    boxes: list[Box]
    ceiling_height: float
    wind: WindSpec
    sensor_noise: dict[str, SensorNoise]
    battery: BatterySpec
    # Flattened obstacle segments for ray casting: columns ax, ay, bx, by, z_lo, z_hi
    segments: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.segments = _compile_segments(self.walls, self.boxes)

    def active_segments(self, z: float) -> np.ndarray:
        """Obstacle segments intersecting the horizontal plane at height z, (M, 4)."""
        seg = self.segments
        mask = (seg[:, 4] <= z) & (z <= seg[:, 5])
        return seg[mask, :4]

    def nearest_obstacle(self, x: float, y: float, z: float) -> tuple[float, np.ndarray]:
        """Distance and world-frame XY unit direction to the closest obstacle at height z.

        Used by metrics and tests as geometry ground truth; the flight stack
        itself only ever sees the laser.
        """
        seg = self.active_segments(z)
        if seg.shape[0] == 0:
            return math.inf, np.zeros(2)
        p = np.array([x, y])
        a = seg[:, 0:2]
        b = seg[:, 2:4]
        ab = b - a
        denom = np.einsum("ij,ij->i", ab, ab)
        denom[denom < 1e-12] = 1e-12
        t = np.clip(np.einsum("ij,ij->i", p - a, ab) / denom, 0.0, 1.0)
        closest = a + t[:, None] * ab
        d = np.linalg.norm(closest - p, axis=1)
        i = int(np.argmin(d))
        direction = closest[i] - p
        n = float(np.linalg.norm(direction))
        if n < 1e-12:
            return 0.0, np.zeros(2)
        return float(d[i]), direction / n


def _compile_segments(walls: list[Wall], boxes: list[Box]) -> np.ndarray:
    rows: list[tuple[float, float, float, float, float, float]] = []
    for wall in walls:
        pts = wall.points
        for i in range(len(pts) - 1):
            rows.append((pts[i, 0], pts[i, 1], pts[i + 1, 0], pts[i + 1, 1], 0.0, wall.height))
    for box in boxes:
        x0, y0, z0 = box.lo
        x1, y1, z1 = box.hi
        corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
        for i in range(4):
            ax, ay = corners[i]
            bx, by = corners[(i + 1) % 4]
            rows.append((ax, ay, bx, by, z0, z1))
    if not rows:
        return np.zeros((0, 6))
    return np.array(rows, dtype=float)


def _require(doc: dict, key: str, path: str):
    if key not in doc:
        raise WorldError(f"{path}{key}: missing required key")
    return doc[key]


def _positive(value, path: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise WorldError(f"{path}: expected a number, got {value!r}") from None
    if not v > 0.0:
        raise WorldError(f"{path}: must be > 0, got {v}")
    return v


def _parse_wall(doc: dict, path: str) -> Wall:
    raw_points = _require(doc, "points", path + ".")
    if not isinstance(raw_points, list) or len(raw_points) < 2:
        raise WorldError(f"{path}.points: need at least 2 vertices")
    try:
        pts = np.array(raw_points, dtype=float)
    except (TypeError, ValueError):
        raise WorldError(f"{path}.points: vertices must be [x, y] pairs") from None
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise WorldError(f"{path}.points: vertices must be [x, y] pairs")
    height = _positive(_require(doc, "height", path + "."), path + ".height")
    return Wall(points=pts, height=height)


def _parse_box(doc: dict, path: str) -> Box:
    lo = np.array(_require(doc, "min", path + "."), dtype=float)
    hi = np.array(_require(doc, "max", path + "."), dtype=float)
    if lo.shape != (3,) or hi.shape != (3,):
        raise WorldError(f"{path}: min/max must be [x, y, z]")
    if not np.all(hi > lo):
        raise WorldError(f"{path}: max must exceed min on every axis")
    return Box(lo=lo, hi=hi)


def parse_world(doc: dict) -> WorldModel:
    """Validate a world document (already parsed JSON) into a WorldModel."""
    if not isinstance(doc, dict):
        raise WorldError("world document must be a JSON object")

    walls = [_parse_wall(w, f"walls[{i}]") for i, w in enumerate(doc.get("walls", []))]
    boxes = [_parse_box(b, f"boxes[{i}]") for i, b in enumerate(doc.get("boxes", []))]
    ceiling = _positive(_require(doc, "ceiling_height", ""), "ceiling_height")

    if not walls and not boxes:
        raise WorldError("walls/boxes: no laser-visible surface in world")

    wind_doc = doc.get("wind", {})
    constant = np.array(wind_doc.get("constant", [0.0, 0.0, 0.0]), dtype=float)
    if constant.shape != (3,):
        raise WorldError("wind.constant: must be [x, y, z]")
    gust_amp = float(wind_doc.get("gust_amplitude", 0.0))
    gust_period = float(wind_doc.get("gust_period_s", 10.0))
    if gust_amp < 0.0:
        raise WorldError("wind.gust_amplitude: must be >= 0")
    if gust_amp > 0.0 and gust_period <= 0.0:
        raise WorldError("wind.gust_period_s: must be > 0")
    wind = WindSpec(constant=constant, gust_amplitude=gust_amp, gust_period_s=gust_period)

    noise = dict(DEFAULT_SENSOR_NOISE)
    for name, entry in doc.get("sensor_noise", {}).items():
        if name not in DEFAULT_SENSOR_NOISE:
            raise WorldError(f"sensor_noise.{name}: unknown sensor")
        sigma = float(entry.get("sigma", 0.0))
        walk = float(entry.get("bias_walk_sigma", 0.0))
        if sigma < 0.0 or walk < 0.0:
            raise WorldError(f"sensor_noise.{name}: sigmas must be >= 0")
        noise[name] = SensorNoise(sigma=sigma, bias_walk_sigma=walk)

    battery_doc = doc.get("battery", {})
    battery = BatterySpec(
        hover_endurance_s=_positive(battery_doc.get("hover_endurance_s", 1200.0), "battery.hover_endurance_s"),
        low_threshold=float(battery_doc.get("low_threshold", 0.25)),
    )
    if not 0.0 < battery.low_threshold < 1.0:
        raise WorldError("battery.low_threshold: must be in (0, 1)")

    return WorldModel(
        walls=walls,
        boxes=boxes,
        ceiling_height=ceiling,
        wind=wind,
        sensor_noise=noise,
        battery=battery,
    )


def load_world(path: str | Path) -> WorldModel:
    """Load and validate a world JSON file."""
    raw = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise WorldError(f"not valid JSON: {exc}") from exc
    return parse_world(doc)
