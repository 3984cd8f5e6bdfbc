"""Motion behaviors: user intention shaping and obstacle safety.

attenuated_go / attenuated_inspect carry the operator (or mission)
intention, scaled down near obstacles.  prevent_collision and
limit_max_height are the safety side: repulsion away from anything
inside the minimum clearance, and a climb-rate bound near the ceiling.
"""

from __future__ import annotations

import math

import numpy as np

from ..util import clamp, clamp_norm, wrap_angle, wrap_angle_array
from .types import Arbitration, BehaviorContext, BehaviorOutput, inactive

# Range jump between neighbouring beams that separates obstacle clusters,
# and the angular gap beyond which beams no longer count as neighbours.
_CLUSTER_JUMP = 0.3
_CLUSTER_ANGLE_GAP = 0.02


def attenuation(d: float, d_min: float, d_att: float) -> float:
    """Speed scale factor: 0 at d_min, 1 at d_att, linear between."""
    return clamp((d - d_min) / (d_att - d_min), 0.0, 1.0)


def _valid_returns(scan) -> tuple[np.ndarray, np.ndarray] | None:
    if scan is None:
        return None
    mask = scan.valid_mask()
    if not np.any(mask):
        return None
    return scan.ranges[mask], scan.angles[mask]


def _nearest_in_cone(
    ranges: np.ndarray, angles: np.ndarray, direction: float, half_angle: float
) -> tuple[float, float]:
    """(distance, bearing) of the closest return within the cone."""
    in_cone = np.abs(wrap_angle_array(angles - direction)) <= half_angle
    if not np.any(in_cone):
        return math.inf, direction
    idx = int(np.argmin(np.where(in_cone, ranges, math.inf)))
    return float(ranges[idx]), float(angles[idx])


def _attenuate_toward(
    horiz: np.ndarray, ranges, angles, ctx: BehaviorContext
) -> np.ndarray:
    """Scale the command component aimed at the nearest in-cone obstacle."""
    lim = ctx.limits
    speed = float(np.linalg.norm(horiz))
    if speed < 1e-9:
        return horiz
    heading = math.atan2(horiz[1], horiz[0])
    d, bearing = _nearest_in_cone(ranges, angles, heading, lim.cone_half_angle)
    if math.isinf(d):
        return horiz
    a = attenuation(d, lim.d_min, lim.d_att)
    u = np.array([math.cos(bearing), math.sin(bearing)])
    toward = float(horiz @ u)
    if toward <= 0.0:
        return horiz
    return horiz + (a - 1.0) * toward * u


def attenuated_go(ctx: BehaviorContext) -> BehaviorOutput:
    """User velocity passed through, braked near obstacles it aims at."""
    name = "attenuated_go"
    if ctx.inspection_mode:
        return inactive(name, Arbitration.COOPERATIVE_ADDITIVE)
    returns = _valid_returns(ctx.scan)
    if returns is None:
        return inactive(name, Arbitration.COOPERATIVE_ADDITIVE)
    lim = ctx.limits
    cmd = np.asarray(ctx.user_cmd, dtype=float)
    horiz = clamp_norm(cmd[:2], lim.v_max)
    vz = clamp(float(cmd[2]), -lim.vz_max, lim.vz_max)
    horiz = _attenuate_toward(horiz, *returns, ctx)
    velocity = np.array([horiz[0], horiz[1], vz])
    return BehaviorOutput(
        name, velocity, ctx.user_yaw_rate, 1.0, Arbitration.COOPERATIVE_ADDITIVE
    )


def attenuated_inspect(ctx: BehaviorContext) -> BehaviorOutput:
    """Slow intention near a surface, holding a set standoff to the front."""
    name = "attenuated_inspect"
    if not ctx.inspection_mode:
        return inactive(name, Arbitration.COOPERATIVE_ADDITIVE)
    returns = _valid_returns(ctx.scan)
    if returns is None:
        return inactive(name, Arbitration.COOPERATIVE_ADDITIVE)
    lim = ctx.limits
    cmd = np.asarray(ctx.user_cmd, dtype=float)
    horiz = clamp_norm(cmd[:2], lim.v_insp)
    vz = clamp(float(cmd[2]), -lim.v_insp, lim.v_insp)
    horiz = _attenuate_toward(horiz, *returns, ctx)

    # Regulate distance to the front surface into the standoff band.
    d_front, _ = _nearest_in_cone(*returns, 0.0, lim.cone_half_angle)
    if d_front <= lim.inspect_front_max:
        lo, hi = lim.inspect_band
        err = (d_front - hi) if d_front > hi else min(d_front - lo, 0.0)
        horiz[0] += clamp(lim.inspect_gain * err, -lim.v_insp, lim.v_insp)
        horiz[0] = clamp(float(horiz[0]), -lim.v_insp, lim.v_insp)
    velocity = np.array([horiz[0], horiz[1], vz])
    return BehaviorOutput(
        name, velocity, ctx.user_yaw_rate, 1.0, Arbitration.COOPERATIVE_ADDITIVE
    )


def _close_clusters(ranges: np.ndarray, angles: np.ndarray, d_min: float):
    """Group sub-d_min returns into contiguous obstacle clusters.

    Yields the (distance, bearing) of each cluster's nearest point.
    Clusters break on range jumps or interleaved far beams, so distinct
    surfaces repel independently instead of as one smeared source.
    """
    order = np.argsort(angles)
    r, th = ranges[order], angles[order]
    close = r < d_min
    clusters: list[list[int]] = []
    current: list[int] = []
    for i in range(len(r)):
        if not close[i]:
            if current:
                clusters.append(current)
                current = []
            continue
        if current and (
            abs(r[i] - r[current[-1]]) >= _CLUSTER_JUMP
            or th[i] - th[current[-1]] > _CLUSTER_ANGLE_GAP
        ):
            clusters.append(current)
            current = []
        current.append(i)
    if current:
        clusters.append(current)
    for cluster in clusters:
        j = cluster[int(np.argmin(r[cluster]))]
        yield float(r[j]), float(th[j])


def _away_wedge(bearings: np.ndarray) -> tuple[float, float] | None:
    """Arc of directions pointing away from every given bearing.

    Each obstacle bearing forbids the half-plane toward it; the permitted
    set is the intersection of the away half-circles, which is a single
    arc (center, half_width) or nothing.
    """
    center = wrap_angle(float(bearings[0]) + math.pi)
    half = math.pi / 2.0
    for th in bearings[1:]:
        delta = wrap_angle(float(th) + math.pi - center)
        lo = max(-half, delta - math.pi / 2.0)
        hi = min(half, delta + math.pi / 2.0)
        if lo > hi:
            return None
        center = wrap_angle(center + 0.5 * (lo + hi))
        half = 0.5 * (hi - lo)
    return center, half


def project_onto_wedge(vec: np.ndarray, wedge: tuple[float, float]) -> np.ndarray:
    """Euclidean projection of a 2D vector onto a direction wedge.

    A wedge with negative half-width is empty and projects to zero.
    """
    center, half = wedge
    if half < 0.0 or float(np.linalg.norm(vec)) <= 1e-12:
        return np.zeros(2)
    off = wrap_angle(math.atan2(float(vec[1]), float(vec[0])) - center)
    if abs(off) <= half:
        return np.asarray(vec, dtype=float)
    edge = center + math.copysign(half, off)
    e = np.array([math.cos(edge), math.sin(edge)])
    return max(float(vec @ e), 0.0) * e


def prevent_collision(ctx: BehaviorContext) -> BehaviorOutput:
    """Repulsion away from every obstacle inside the minimum clearance."""
    name = "prevent_collision"
    lim = ctx.limits
    returns = _valid_returns(ctx.scan)
    if returns is None:
        # Blind: freeze by overriding the intention with zero velocity.
        return BehaviorOutput(
            name,
            np.zeros(3),
            0.0,
            1.0,
            Arbitration.COMPETITIVE_OVERRIDE,
            away_wedge=(0.0, -1.0),
        )
    ranges, angles = returns
    close = ranges < lim.d_min
    if not np.any(close):
        return inactive(name, Arbitration.COMPETITIVE_OVERRIDE)
    rep = np.zeros(2)
    for d, bearing in _close_clusters(ranges, angles, lim.d_min):
        mag = lim.v_rep_max * (1.0 - d / lim.d_min)
        rep -= mag * np.array([math.cos(bearing), math.sin(bearing)])
    rep = clamp_norm(rep, lim.v_rep_max)

    # Never push toward any close point: project the sum onto the wedge
    # of directions that move away from all of them.
    wedge = _away_wedge(angles[close]) or (0.0, -1.0)
    rep = project_onto_wedge(rep, wedge)
    return BehaviorOutput(
        name,
        np.array([rep[0], rep[1], 0.0]),
        0.0,
        1.0,
        Arbitration.COMPETITIVE_OVERRIDE,
        away_wedge=wedge,
    )


def limit_max_height(ctx: BehaviorContext) -> BehaviorOutput:
    """Bound the climb rate near the height limit and the ceiling."""
    name = "limit_max_height"
    lim = ctx.limits
    cap = lim.vz_max
    if math.isfinite(lim.z_max):
        # Ramp the permitted climb to zero over the last z_ramp metres.
        cap = min(cap, clamp((lim.z_max - ctx.state.z) / lim.z_ramp, 0.0, 1.0) * lim.vz_max)
    d_c = ctx.ceiling_distance
    if d_c is not None and math.isfinite(d_c):
        if d_c < lim.d_min:
            cap = min(cap, -lim.v_rep_max * (1.0 - d_c / lim.d_min))
        else:
            cap = min(cap, attenuation(d_c, lim.d_min, lim.d_att) * lim.vz_max)
    if cap >= lim.vz_max - 1e-12:
        return inactive(name, Arbitration.COMPETITIVE_LIMIT)
    return BehaviorOutput(
        name, np.zeros(3), 0.0, 1.0, Arbitration.COMPETITIVE_LIMIT, vz_cap=cap
    )
