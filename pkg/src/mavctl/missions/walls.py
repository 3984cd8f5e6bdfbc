"""Front-wall detection from one laser scan, for sweep planning."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..estimation.state import VehicleState
from ..sim.laser import LaserScan
from ..util import rot2


@dataclass(frozen=True)
class WallFit:
    """A straight wall segment in world coordinates.

    foot is the perpendicular projection of the vehicle onto the wall
    line; tangent runs along the wall; normal points from the wall back
    toward the vehicle.  extent is the signed span of wall returns along
    the tangent, measured from the foot.
    """

    foot: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    extent: tuple[float, float]
    rms: float

    @property
    def length(self) -> float:
        return self.extent[1] - self.extent[0]


def _tls_line(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Total-least-squares line: (centroid, unit tangent)."""
    centroid = points.mean(axis=0)
    centered = points - centroid
    cov = centered.T @ centered / len(points)
    _, eigvecs = np.linalg.eigh(cov)
    return centroid, eigvecs[:, 1]  # largest eigenvalue: along the wall


def fit_front_wall(
    scan: LaserScan,
    state: VehicleState,
    max_distance: float = 6.0,
    sector: float = math.radians(60.0),
    rms_limit: float = 0.1,
    min_points: int = 20,
    inlier_band: float = 0.2,
    min_inlier_fraction: float = 0.5,
) -> WallFit | None:
    """Trimmed total-least-squares line fit over the front scan sector.

    Side walls and clutter inside the sector are trimmed by refitting on
    the points within inlier_band of the current line.  Returns None
    when no dominant straight surface emerges: too few returns, inliers
    a minority of the sector, or inlier RMS at or above rms_limit.
    """
    mask = scan.valid_mask()
    angles = scan.angles
    front = mask & (scan.ranges <= max_distance) & (np.abs(angles) <= sector)
    if int(np.count_nonzero(front)) < min_points:
        return None
    r = scan.ranges[front]
    th = angles[front]
    body = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    pos = np.array([state.x, state.y])
    world = pos + body @ rot2(state.yaw).T

    inliers = np.ones(len(world), dtype=bool)
    centroid, tangent = _tls_line(world)
    for _ in range(8):
        normal = np.array([-tangent[1], tangent[0]])
        residuals = np.abs((world - centroid) @ normal)
        refreshed = residuals <= inlier_band
        if int(np.count_nonzero(refreshed)) < min_points:
            return None
        if np.array_equal(refreshed, inliers):
            break
        inliers = refreshed
        centroid, tangent = _tls_line(world[inliers])

    if float(np.count_nonzero(inliers)) / len(world) < min_inlier_fraction:
        return None
    normal = np.array([-tangent[1], tangent[0]])
    if float(normal @ (pos - centroid)) < 0.0:
        normal = -normal
        tangent = -tangent
    rms = math.sqrt(float(np.mean(((world[inliers] - centroid) @ normal) ** 2)))
    if rms >= rms_limit:
        return None

    foot = pos - float((pos - centroid) @ normal) * normal
    if float(np.linalg.norm(pos - foot)) > max_distance:
        return None

    # Wall extent: every return near the fitted line, across the full FOV.
    all_r = scan.ranges[mask]
    all_th = angles[mask]
    all_body = np.stack([all_r * np.cos(all_th), all_r * np.sin(all_th)], axis=1)
    all_world = pos + all_body @ rot2(state.yaw).T
    on_line = np.abs((all_world - foot) @ normal) < rms_limit
    s = (all_world[on_line] - foot) @ tangent
    return WallFit(
        foot=foot,
        tangent=tangent,
        normal=normal,
        extent=(float(s.min()), float(s.max())),
        rms=rms,
    )
