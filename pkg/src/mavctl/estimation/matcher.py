"""Planar scan matching: ICP between consecutive laser scans.

Recovers the vehicle motion (dx, dy, dpsi) expressed in the previous scan's
body frame. Correspondences are nearest neighbors, but residuals are measured
along the reference surface normal (point-to-line): with a scanning sensor the
two clouds sample different spots of the same surfaces, and a point-to-point
metric is biased toward zero motion by grazing-incidence parallax.
Convergence is reported honestly: a low-fitness or exhausted alignment returns
converged=False instead of a guess.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..sim.laser import LaserScan

MIN_VALID_POINTS = 30


@dataclass(frozen=True)
class ScanMatchResult:
    dx: float
    dy: float
    dpsi: float
    fitness: float  # inlier fraction in [0, 1]
    converged: bool

    @property
    def translation(self) -> np.ndarray:
        return np.array([self.dx, self.dy])


@dataclass(frozen=True)
class MatcherConfig:
    stride: int = 4  # beam subsampling
    max_iterations: int = 50
    correspondence_dist: float = 0.5  # m, NN pairs beyond this are dropped
    fitness_dist: float = 0.2  # m, inlier threshold for the fitness score
    fitness_floor: float = 0.6
    epsilon: float = 1e-6  # parameter-update convergence threshold
    edge_jump: float = 0.5  # m, neighbor gap that invalidates a normal


FAILED = ScanMatchResult(0.0, 0.0, 0.0, 0.0, False)


def scan_points(scan: LaserScan, stride: int = 1) -> np.ndarray:
    """Cartesian points of valid returns in the scan's body frame, (N, 2)."""
    ranges = scan.ranges[::stride]
    angles = scan.angles[::stride]
    mask = np.isfinite(ranges) & (ranges > 0.05)
    r = ranges[mask]
    a = angles[mask]
    return np.stack([r * np.cos(a), r * np.sin(a)], axis=1)


def apply_transform(points: np.ndarray, dx: float, dy: float, dpsi: float) -> np.ndarray:
    c, s = math.cos(dpsi), math.sin(dpsi)
    rotated = points @ np.array([[c, s], [-s, c]])  # row-vector form of R(dpsi)
    return rotated + np.array([dx, dy])


def _surface_normals(points: np.ndarray, edge_jump: float) -> tuple[np.ndarray, np.ndarray]:
    """Unit normals per scan point from angular neighbors, with a validity
    mask that drops depth discontinuities and degenerate tangents."""
    n = len(points)
    tangent = np.empty_like(points)
    tangent[1:-1] = points[2:] - points[:-2]
    tangent[0] = points[1] - points[0]
    tangent[-1] = points[-1] - points[-2]
    length = np.linalg.norm(tangent, axis=1)
    valid = (length > 1e-9) & (length < 2.0 * edge_jump)
    length[~valid] = 1.0
    normals = np.stack([-tangent[:, 1], tangent[:, 0]], axis=1) / length[:, None]
    return normals, valid


def match_scans(
    prev: LaserScan,
    curr: LaserScan,
    guess: tuple[float, float, float] = (0.0, 0.0, 0.0),
    config: MatcherConfig = MatcherConfig(),
) -> ScanMatchResult:
    p_prev = scan_points(prev, config.stride)
    p_curr = scan_points(curr, config.stride)
    if len(p_prev) < MIN_VALID_POINTS or len(p_curr) < MIN_VALID_POINTS:
        return FAILED

    tree = cKDTree(p_prev)
    normals, normal_ok = _surface_normals(p_prev, config.edge_jump)
    dx, dy, dpsi = guess

    converged_step = False
    prev_delta = None
    damp = 1.0
    for _ in range(config.max_iterations):
        moved = apply_transform(p_curr, dx, dy, dpsi)
        dist, idx = tree.query(moved)
        mask = (dist < config.correspondence_dist) & normal_ok[idx]
        if int(mask.sum()) < MIN_VALID_POINTS:
            return FAILED

        m = moved[mask]
        q = p_prev[idx[mask]]
        n = normals[idx[mask]]
        residual = np.einsum("ij,ij->i", n, m - q)
        # Jacobian of n . (R(theta)p + t) wrt (dx, dy, dtheta) at the current
        # estimate: [n_x, n_y, n . perp(m)] with perp(m) = (-m_y, m_x).
        jac = np.column_stack([n[:, 0], n[:, 1], n[:, 0] * -m[:, 1] + n[:, 1] * m[:, 0]])
        lhs = jac.T @ jac
        rhs = -jac.T @ residual
        try:
            delta = np.linalg.solve(lhs, rhs)
        except np.linalg.LinAlgError:
            delta, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)

        # Discrete correspondences can settle into a two-state flip-flop where
        # successive steps exactly undo each other; damping on direction
        # reversal collapses the cycle onto its midpoint.
        if prev_delta is not None and float(delta @ prev_delta) < 0.0:
            damp *= 0.5
        prev_delta = delta
        delta = delta * damp

        # Compose the increment on the left: T <- delta o T.
        c, s = math.cos(delta[2]), math.sin(delta[2])
        dx, dy = c * dx - s * dy + delta[0], s * dx + c * dy + delta[1]
        dpsi = dpsi + delta[2]
        if float(np.abs(delta).sum()) < config.epsilon:
            converged_step = True
            break

    moved = apply_transform(p_curr, dx, dy, dpsi)
    dist, _ = tree.query(moved)
    fitness = float(np.mean(dist < config.fitness_dist))
    converged = converged_step and fitness >= config.fitness_floor
    return ScanMatchResult(dx, dy, dpsi, fitness, converged)
