"""Run logs: per-control-tick CSV, event journal, and a run manifest.

Formatting is pinned ("%.6f", fixed column order, sorted manifest keys)
so that two runs with the same seed and inputs produce byte-identical
files; the manifest carries the hashes needed to prove a replay used
the same world, script, and configuration.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .stack import ControlStack

CSV_COLUMNS = [
    "t",
    "phase",
    "x",
    "y",
    "z",
    "psi",
    "vx",
    "vy",
    "vz",
    "x_true",
    "y_true",
    "z_true",
    "psi_true",
    "cmd_vx",
    "cmd_vy",
    "cmd_vz",
    "cmd_yawrate",
    "user_vx",
    "user_vy",
    "user_vz",
    "min_obstacle_d",
    "battery",
    "active_behaviors",
]

CSV_NAME = "run.csv"
EVENTS_NAME = "events.jsonl"
MANIFEST_NAME = "manifest.json"


def file_sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def behavior_cell(stack: ControlStack) -> str:
    parts = [f"{name}:{activation:.2f}" for name, activation in stack.cmd.contributors]
    mission = stack.missions.describe()
    if mission:
        tag = f"mission:{mission['kind']}"
        if "progress" in mission:
            tag += f":{mission['progress']}/{mission['total']}"
        parts.append(tag)
    return ";".join(parts) if parts else "-"


class RunWriter:
    def __init__(self, out_dir: str | Path, manifest: dict):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.csv_path = self.dir / CSV_NAME
        self.events_path = self.dir / EVENTS_NAME
        self.manifest_path = self.dir / MANIFEST_NAME
        self.manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
        self._csv = self.csv_path.open("w")
        self._csv.write(",".join(CSV_COLUMNS) + "\n")
        self._events = self.events_path.open("w")
        self.rows = 0

    def write_row(self, stack: ControlStack) -> None:
        truth = stack.sim.truth
        s = stack.state
        cmd = stack.cmd
        numeric = [
            stack.sim.t,
            None,  # phase slot, formatted separately
            s.x,
            s.y,
            s.z,
            s.yaw,
            s.vx,
            s.vy,
            s.vz,
            truth.position[0],
            truth.position[1],
            truth.position[2],
            truth.yaw,
            cmd.vx,
            cmd.vy,
            cmd.vz,
            cmd.yaw_rate,
            stack.user_velocity[0],
            stack.user_velocity[1],
            stack.user_velocity[2],
            stack.min_obstacle_d,
            truth.battery_fraction,
        ]
        cells = ["%.6f" % v if v is not None else stack.phase.value for v in numeric]
        cells.append(behavior_cell(stack))
        self._csv.write(",".join(cells) + "\n")
        self.rows += 1

    def write_events(self, events: list[dict]) -> None:
        for ev in events:
            self._events.write(json.dumps(ev, sort_keys=True) + "\n")

    def close(self) -> None:
        self._csv.close()
        self._events.close()

    def __enter__(self) -> "RunWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
