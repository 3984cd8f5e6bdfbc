"""Headless scripted runs: the path every acceptance scenario goes through."""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

from ..control import FlightPhase
from ..sim.engine import SIM_DT
from ..sim.world import load_world
from .config import load_config
from .logs import RunWriter, file_sha256
from .scripting import ScriptRunner, load_script
from .stack import CONTROL_DIV, ControlStack

EXIT_OK = 0
EXIT_LAND_NOW = 2
EXIT_TIMEOUT = 3
EXIT_SCRIPT_ERROR = 4

# Hard ceiling on simulated time so a wedged run can never spin forever.
MAX_SIM_S = 3600.0


@dataclass
class RunResult:
    exit_code: int
    reason: str
    out_dir: Path
    control_ticks: int
    sim_seconds: float

    @property
    def ok(self) -> bool:
        return self.exit_code == EXIT_OK


def run_headless(
    world_path: str | Path,
    script_path: str | Path,
    seed: int,
    out_dir: str | Path,
    fast: bool = True,
    config_path: str | Path | None = None,
) -> RunResult:
    world = load_world(world_path)
    config = load_config(config_path, world)
    start, actions = load_script(script_path)

    manifest = {
        "seed": int(seed),
        "world": str(world_path),
        "world_sha256": file_sha256(world_path),
        "script": str(script_path),
        "script_sha256": file_sha256(script_path),
        "config_sha256": config.hash,
        "config": config.resolved,
        "start": list(start),
        "sim_dt": SIM_DT,
        "control_every_n_ticks": CONTROL_DIV,
    }

    stack = ControlStack(world, config, seed, start=start, heartbeat_monitor=False)
    script = ScriptRunner(actions)
    exit_code, reason = EXIT_OK, ""
    wall_start = time.monotonic()

    with RunWriter(out_dir, manifest) as writer:
        while True:
            if not stack.tick():
                continue
            now = stack.sim.t
            events = stack.drain_events()
            writer.write_events(events)
            script.observe(events)

            if stack.aborted_land_now:
                # Let the forced landing finish so the log shows the whole story.
                writer.write_row(stack)
                if stack.phase is FlightPhase.ON_GROUND or now > MAX_SIM_S:
                    exit_code, reason = EXIT_LAND_NOW, "viability forced land-now"
                    break
                continue

            writer.write_row(stack)
            status = script.on_control_tick(stack, now)
            if status == ScriptRunner.DONE:
                break
            if status == ScriptRunner.TIMEOUT:
                exit_code, reason = EXIT_TIMEOUT, script.error
                break
            if status == ScriptRunner.FAILED:
                exit_code, reason = EXIT_SCRIPT_ERROR, script.error
                break
            if now > MAX_SIM_S:
                exit_code, reason = EXIT_TIMEOUT, "simulated-time ceiling reached"
                break
            if not fast:
                lag = now - (time.monotonic() - wall_start)
                if lag > 0:
                    time.sleep(lag)
        if stack.aborted_land_now and exit_code == EXIT_OK:
            exit_code, reason = EXIT_LAND_NOW, "viability forced land-now"

    return RunResult(
        exit_code=exit_code,
        reason=reason,
        out_dir=Path(out_dir),
        control_ticks=stack.control_ticks,
        sim_seconds=stack.sim.t,
    )
