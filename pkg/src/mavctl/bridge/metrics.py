"""Metric extraction from run logs: hover, collision, go-home, sweep.

Each report function takes a log location (the run directory or the
run.csv inside it), reads only the CSV + event journal, and returns a
plot-ready dict. Nothing here touches the simulator, so the reports
work on any log with the documented schema.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..sim.world import WorldModel, load_world
from ..util import rot2
from .logs import CSV_NAME, EVENTS_NAME

WITHIN_BAND = 0.05  # hover acceptance band, m
ATTENUATION_START = 2.5
OVERRIDE_DISTANCE = 1.3


class MetricsError(ValueError):
    pass


@dataclass
class RunData:
    t: np.ndarray
    phase: list[str]
    est: np.ndarray  # columns x, y, z, psi
    vel: np.ndarray  # columns vx, vy, vz
    truth: np.ndarray  # columns x, y, z, psi
    cmd: np.ndarray  # columns vx, vy, vz, yawrate (body frame)
    user: np.ndarray  # columns vx, vy, vz (body frame)
    min_obstacle_d: np.ndarray
    battery: np.ndarray
    behaviors: list[str]
    events: list[dict]

    def events_named(self, kind: str) -> list[dict]:
        return [e for e in self.events if e.get("event") == kind]


def _resolve(log: str | Path) -> tuple[Path, Path]:
    p = Path(log)
    if p.is_dir():
        return p / CSV_NAME, p / EVENTS_NAME
    return p, p.with_name(EVENTS_NAME)


def load_run(log: str | Path) -> RunData:
    csv_path, events_path = _resolve(log)
    if not csv_path.exists():
        raise MetricsError(f"no run log at {csv_path}")
    with csv_path.open() as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    if not rows:
        raise MetricsError(f"{csv_path}: empty log")
    col = {name: i for i, name in enumerate(header)}

    def floats(*names: str) -> np.ndarray:
        idx = [col[n] for n in names]
        return np.array([[float(r[i]) for i in idx] for r in rows])

    events = []
    if events_path.exists():
        with events_path.open() as fh:
            events = [json.loads(line) for line in fh if line.strip()]
    return RunData(
        t=floats("t")[:, 0],
        phase=[r[col["phase"]] for r in rows],
        est=floats("x", "y", "z", "psi"),
        vel=floats("vx", "vy", "vz"),
        truth=floats("x_true", "y_true", "z_true", "psi_true"),
        cmd=floats("cmd_vx", "cmd_vy", "cmd_vz", "cmd_yawrate"),
        user=floats("user_vx", "user_vy", "user_vz"),
        min_obstacle_d=floats("min_obstacle_d")[:, 0],
        battery=floats("battery")[:, 0],
        behaviors=[r[col["active_behaviors"]] for r in rows],
        events=events,
    )


def _round_list(values, digits: int = 4) -> list:
    return [round(float(v), digits) for v in values]


# -- hover ------------------------------------------------------------


def hover_errors(run: RunData) -> tuple[np.ndarray, dict]:
    """Truth-minus-anchor errors (N, 3) over the last keep-position window."""
    keeps = run.events_named("keep_engaged")
    if not keeps:
        raise MetricsError("no keep_engaged event: not a hover log")
    anchor_ev = keeps[-1]
    t0 = anchor_ev["t"]
    releases = [e["t"] for e in run.events_named("keep_released") if e["t"] > t0]
    t1 = min(releases) if releases else float(run.t[-1])
    mask = (run.t >= t0) & (run.t <= t1)
    if not np.any(mask):
        raise MetricsError("keep window contains no samples")
    anchor = np.array([anchor_ev["x"], anchor_ev["y"], anchor_ev["z"]])
    return run.truth[mask, :3] - anchor, {"anchor": _round_list(anchor), "t0": t0, "t1": t1}


def hover_report(log: str | Path) -> dict:
    run = load_run(log)
    errors, window = hover_errors(run)
    axes = {}
    for i, name in enumerate(("x", "y", "z")):
        e = errors[:, i]
        counts, edges = np.histogram(e, bins=40, range=(-0.2, 0.2))
        axes[name] = {
            "mean": round(float(e.mean()), 6),
            "std": round(float(e.std()), 6),
            "within_5cm": round(float(np.mean(np.abs(e) <= WITHIN_BAND)), 6),
            "histogram": {"edges": _round_list(edges), "counts": counts.tolist()},
            "errors": _round_list(e),
        }
    return {"kind": "hover", **window, "samples": len(errors), "axes": axes}


# -- collision --------------------------------------------------------


def collision_report(log: str | Path) -> dict:
    run = load_run(log)
    approach = np.flatnonzero((run.user[:, 0] > 0.0) & (np.array(run.phase) == "flying"))
    if approach.size == 0:
        raise MetricsError("no forward user command: not a wall-approach log")
    idx = approach
    t = run.t[idx]
    d = run.min_obstacle_d[idx]
    user = run.user[idx, 0]
    cmd = run.cmd[idx, 0]

    behaviors = [run.behaviors[i] for i in idx]

    below_att = np.flatnonzero(cmd <= 0.98 * user)
    a_i = int(below_att[0]) if below_att.size else None
    # Instant B is when the override behavior wakes up: the vehicle's own
    # perception says an obstacle is inside the minimum distance. The true
    # distance at that tick sits within the instant tolerance of 1.3.
    override_on = [i for i, cell in enumerate(behaviors) if "prevent_collision" in cell]
    b_i = override_on[0] if override_on else None
    negative = np.flatnonzero(cmd < 0.0)
    c_i = int(negative[0]) if negative.size else None

    instants = {}
    for name, i in (("A", a_i), ("B", b_i), ("C", c_i)):
        instants[name] = None if i is None else {"t": round(float(t[i]), 3), "distance": round(float(d[i]), 4)}

    far = d > ATTENUATION_START
    far_max_err = float(np.max(np.abs(cmd[far] - user[far]) / user[far])) if np.any(far) else 0.0

    # Attenuation-law shape over the first approach only (up to instant B);
    # after that the vehicle oscillates around the repulsion equilibrium.
    approach_end = b_i if b_i is not None else len(d)
    band = slice(0, approach_end)
    in_band = (d[band] > OVERRIDE_DISTANCE) & (d[band] < ATTENUATION_START)
    edges = np.arange(OVERRIDE_DISTANCE, ATTENUATION_START + 1e-9, 0.1)
    bin_means = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = in_band & (d[band] >= lo) & (d[band] < hi)
        bin_means.append(float(np.mean(cmd[band][sel])) if np.any(sel) else None)
    present = [m for m in bin_means if m is not None]
    strictly_decreasing = all(a < b for a, b in zip(present[:-1], present[1:]))

    return {
        "kind": "collision",
        "instants": instants,
        "min_true_distance": round(float(run.min_obstacle_d.min()), 4),
        "far_field_max_relative_error": round(far_max_err, 6),
        "band_bin_edges": _round_list(edges),
        "band_bin_mean_cmd": [None if m is None else round(m, 4) for m in bin_means],
        "cmd_increases_with_distance": strictly_decreasing,
        "series": {
            "t": _round_list(t, 3),
            "distance": _round_list(d),
            "user_vx": _round_list(user),
            "cmd_vx": _round_list(cmd),
        },
    }


# -- go home ----------------------------------------------------------


def gohome_report(log: str | Path) -> dict:
    run = load_run(log)
    homes = run.events_named("home_set") + run.events_named("home_recorded")
    if not homes:
        raise MetricsError("no recorded home: not a go-home log")
    home = max(homes, key=lambda e: e["t"])
    completes = [
        e for e in run.events_named("mission_complete") if e.get("kind") == "go-home"
    ]
    if not completes:
        raise MetricsError("go-home mission never completed in this log")
    t_done = completes[-1]["t"]
    i = int(np.searchsorted(run.t, t_done))
    i = min(i, len(run.t) - 1)
    at_done = run.truth[i, :3]
    target = np.array([home["x"], home["y"], home["z"]])
    # Final position: where the vehicle holds once back home, i.e. the last
    # airborne sample (landing descent would only measure the ground).
    flying = [j for j, p in enumerate(run.phase) if p == "flying" and run.t[j] >= t_done]
    final = run.truth[flying[-1] if flying else i, :3]
    return {
        "kind": "gohome",
        "home": _round_list(target),
        "distance_at_completion": round(float(np.linalg.norm(at_done - target)), 4),
        "final_distance": round(float(np.linalg.norm(final - target)), 4),
        "path": {
            "t": _round_list(run.t, 3),
            "x": _round_list(run.truth[:, 0]),
            "y": _round_list(run.truth[:, 1]),
            "z": _round_list(run.truth[:, 2]),
        },
    }


# -- sweeps and verticals ---------------------------------------------


def _mission_events(run: RunData, kinds: tuple[str, ...]) -> tuple[dict, list[dict], dict | None]:
    starts = [e for e in run.events_named("mission_started") if e.get("kind") in kinds]
    if not starts:
        raise MetricsError(f"no {'/'.join(kinds)} mission in this log")
    start = starts[-1]
    reached = [e for e in run.events_named("waypoint_reached") if e["t"] >= start["t"]]
    done = [
        e
        for e in run.events_named("mission_complete")
        if e.get("kind") in kinds and e["t"] >= start["t"]
    ]
    return start, reached, (done[0] if done else None)


def _plane_deviation(run: RunData, plan: np.ndarray, t0: float, t1: float) -> np.ndarray:
    """Signed distance from the truth path to the plan's vertical plane."""
    yaw = plan[0, 3]
    normal = np.array([math.cos(yaw), math.sin(yaw)])
    anchor = plan[0, :2]
    mask = (run.t >= t0) & (run.t <= t1)
    return (run.truth[mask, :2] - anchor) @ normal


def _column_windows(plan: np.ndarray, reached_t: list[float]) -> list[tuple[float, float, float]]:
    """(t_start, t_end, direction) per same-xy column of the plan."""
    windows = []
    i = 0
    while i < len(plan) and i < len(reached_t):
        j = i
        while (
            j + 1 < len(plan)
            and j + 1 < len(reached_t)
            and np.allclose(plan[j + 1, :2], plan[i, :2], atol=1e-6)
        ):
            j += 1
        if j > i:
            direction = math.copysign(1.0, plan[j, 2] - plan[i, 2])
            windows.append((reached_t[i], reached_t[j], direction))
        i = j + 1
    return windows


def _close_directions(world: WorldModel, x: float, y: float, z: float, radius: float) -> np.ndarray:
    """World-frame unit directions to every obstacle point within radius."""
    seg = world.active_segments(z)
    if seg.shape[0] == 0:
        return np.zeros((0, 2))
    p = np.array([x, y])
    a, b = seg[:, 0:2], seg[:, 2:4]
    ab = b - a
    denom = np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-12)
    t = np.clip(np.einsum("ij,ij->i", p - a, ab) / denom, 0.0, 1.0)
    closest = a + t[:, None] * ab
    offs = closest - p
    dist = np.linalg.norm(offs, axis=1)
    sel = (dist < radius) & (dist > 1e-9)
    return offs[sel] / dist[sel, None]


def safety_dominance_violations(
    run: RunData, world: WorldModel, radius: float = 1.3, tol: float = 0.05
) -> list[dict]:
    """Ticks whose fused command points at an obstacle closer than radius.

    The command is body-frame; the check rotates it into the world by the
    true heading and projects onto the direction of every close obstacle
    point. tol absorbs estimation error between the commanded frame and
    the true geometry.
    """
    violations = []
    candidates = np.flatnonzero(run.min_obstacle_d < radius)
    for i in candidates:
        x, y, z, psi = run.truth[i]
        dirs = _close_directions(world, x, y, z, radius)
        if dirs.size == 0:
            continue
        v_world = rot2(psi) @ run.cmd[i, :2]
        toward = dirs @ v_world
        worst = float(toward.max())
        if worst > tol:
            violations.append(
                {"t": round(float(run.t[i]), 3), "toward_speed": round(worst, 4)}
            )
    return violations


def sweep_report(log: str | Path, world_path: str | Path | None = None) -> dict:
    run = load_run(log)
    start, reached, done = _mission_events(run, ("sweep", "vertical"))
    plan = np.array(start["plan"], dtype=float)
    total = len(plan)
    indices = [e["index"] for e in reached][:total]
    in_order = indices == list(range(len(indices)))
    reached_t = [e["t"] for e in reached]

    report: dict = {
        "kind": "sweep",
        "mission_kind": start["kind"],
        "waypoints_total": total,
        "waypoints_reached": len(indices),
        "achieved_ratio": round(len(indices) / total, 6) if total else 0.0,
        "in_order": in_order,
        "completed": done is not None,
        "plan": [_round_list(w) for w in plan],
        "path": {
            "t": _round_list(run.t, 3),
            "x": _round_list(run.truth[:, 0]),
            "y": _round_list(run.truth[:, 1]),
            "z": _round_list(run.truth[:, 2]),
        },
    }

    if len(reached_t) >= 2:
        dev = _plane_deviation(run, plan, reached_t[0], reached_t[-1])
        report["plane_deviation_max"] = round(float(np.max(np.abs(dev))), 4)

    if start["kind"] == "vertical" and reached_t:
        drawdowns = []
        mono = True
        for t0, t1, direction in _column_windows(plan, reached_t):
            mask = (run.t >= t0) & (run.t <= t1)
            z = run.truth[mask, 2] * direction
            if z.size:
                drawdown = float(np.max(np.maximum.accumulate(z) - z))
                drawdowns.append(round(drawdown, 4))
                mono = mono and drawdown <= 0.15
        report["column_max_drawdown"] = drawdowns
        report["z_monotone_per_column"] = mono

    if world_path is not None:
        world = load_world(world_path)
        violations = safety_dominance_violations(run, world)
        report["safety_violations"] = violations
        report["safety_dominance_held"] = not violations
    return report


REPORTERS = {
    "hover": hover_report,
    "collision": collision_report,
    "gohome": gohome_report,
    "sweep": sweep_report,
}
