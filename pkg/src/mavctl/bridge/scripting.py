"""Mission scripts: a JSON action list driving a ControlStack headlessly.

The action vocabulary mirrors the wire protocol's mission commands, so a
script is exactly the message sequence an operator session would send:

    [{"action": "takeoff"},
     {"action": "keep", "duration": 60},
     {"action": "land"}]

Durations are simulated seconds. Each action may carry a "timeout"
(seconds until the run is declared stuck); sensible defaults apply.
A script file may also be an object {"start": {x, y, yaw}, "actions":
[...]} to spawn the vehicle away from the world origin.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..control import FlightPhase
from .stack import ControlStack


class ScriptError(ValueError):
    pass


_DEFAULT_TIMEOUT = {
    "takeoff": 30.0,
    "land": 60.0,
    "sweep": 600.0,
    "vertical": 600.0,
    "go_home": 120.0,
}

_PARAM_NAMES = {
    "takeoff": (),
    "land": (),
    "velocity": ("vx", "vy", "vz", "yaw_rate", "duration"),
    "sweep": ("width", "height", "spacing", "end_to_end"),
    "vertical": ("max_height", "offset", "bearing", "spacing"),
    "go_home": (),
    "keep": ("duration",),
    "inspection_mode": ("on",),
    "wait": ("duration",),
}

_REQUIRED = {
    "sweep": ("height",),
    "vertical": ("max_height",),
    "inspection_mode": ("on",),
}


@dataclass
class ScriptAction:
    kind: str
    params: dict = field(default_factory=dict)
    timeout: float = 0.0
    duration: float = 0.0


def parse_script(doc) -> tuple[tuple[float, float, float], list[ScriptAction]]:
    start = (0.0, 0.0, 0.0)
    if isinstance(doc, dict):
        raw_start = doc.get("start", {})
        if not isinstance(raw_start, dict):
            raise ScriptError("start: expected an object with x, y, yaw")
        start = (
            float(raw_start.get("x", 0.0)),
            float(raw_start.get("y", 0.0)),
            float(raw_start.get("yaw", 0.0)),
        )
        doc = doc.get("actions")
    if not isinstance(doc, list) or not doc:
        raise ScriptError("script must be a non-empty list of actions")

    actions = []
    for i, entry in enumerate(doc):
        if not isinstance(entry, dict) or "action" not in entry:
            raise ScriptError(f"actions[{i}]: expected an object with an 'action' key")
        kind = entry["action"]
        if kind not in _PARAM_NAMES:
            raise ScriptError(f"actions[{i}]: unknown action {kind!r}")
        params = {k: v for k, v in entry.items() if k not in ("action", "timeout")}
        unknown = set(params) - set(_PARAM_NAMES[kind])
        if unknown:
            raise ScriptError(f"actions[{i}] ({kind}): unknown params {sorted(unknown)}")
        missing = set(_REQUIRED.get(kind, ())) - set(params)
        if missing:
            raise ScriptError(f"actions[{i}] ({kind}): missing params {sorted(missing)}")
        duration = float(params.pop("duration", 0.0))
        if kind in ("velocity", "keep", "wait") and duration <= 0.0:
            raise ScriptError(f"actions[{i}] ({kind}): needs a positive duration")
        timeout = float(entry.get("timeout", _DEFAULT_TIMEOUT.get(kind, 0.0)))
        actions.append(ScriptAction(kind, params, timeout, duration))
    return start, actions


def load_script(path: str | Path) -> tuple[tuple[float, float, float], list[ScriptAction]]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ScriptError(f"{path}: {e}") from None
    return parse_script(doc)


class ScriptRunner:
    """Advances the action list against a stack, one control tick at a time."""

    RUNNING = "running"
    DONE = "done"
    TIMEOUT = "timeout"
    FAILED = "failed"

    def __init__(self, actions: list[ScriptAction]):
        self.actions = actions
        self.index = 0
        self.started_t: float | None = None
        self.error = ""
        self._mission_done = False

    @property
    def current(self) -> ScriptAction | None:
        return self.actions[self.index] if self.index < len(self.actions) else None

    def observe(self, events: list[dict]) -> None:
        for ev in events:
            if ev.get("event") in ("mission_complete", "mission_aborted"):
                self._mission_done = True

    def on_control_tick(self, stack: ControlStack, now: float) -> str:
        action = self.current
        if action is None:
            return self.DONE
        if self.started_t is None:
            self.started_t = now
            self._mission_done = False
            ok, detail = self._begin(stack, action)
            if not ok:
                self.error = f"{action.kind}: {detail}"
                return self.FAILED
        if self._finished(stack, action, now):
            self._end(stack, action)
            self.index += 1
            self.started_t = None
            return self.on_control_tick(stack, now) if self.current is None else self.RUNNING
        if action.timeout > 0.0 and now - self.started_t > action.timeout:
            self.error = f"{action.kind}: timed out after {action.timeout:g}s"
            return self.TIMEOUT
        return self.RUNNING

    def _begin(self, stack: ControlStack, action: ScriptAction) -> tuple[bool, str]:
        p = action.params
        if action.kind == "takeoff":
            return stack.request_takeoff()
        if action.kind == "land":
            return stack.request_land()
        if action.kind == "velocity":
            return stack.set_velocity(
                float(p.get("vx", 0.0)),
                float(p.get("vy", 0.0)),
                float(p.get("vz", 0.0)),
                float(p.get("yaw_rate", 0.0)),
            )
        if action.kind == "sweep":
            return stack.request_sweep(
                float(p.get("width", 0.0)),
                float(p["height"]),
                float(p.get("spacing", 1.0)),
                bool(p.get("end_to_end", False)),
            )
        if action.kind == "vertical":
            return stack.request_vertical(
                float(p["max_height"]),
                float(p.get("offset", 1.0)),
                float(p.get("bearing", 0.0)),
                float(p.get("spacing", 1.0)),
            )
        if action.kind == "go_home":
            return stack.request_go_home()
        if action.kind == "keep":
            return stack.request_keep()
        if action.kind == "inspection_mode":
            return stack.set_inspection(bool(p.get("on", True)))
        if action.kind == "wait":
            return True, ""
        raise ScriptError(f"unhandled action {action.kind!r}")

    def _finished(self, stack: ControlStack, action: ScriptAction, now: float) -> bool:
        if action.kind == "takeoff":
            return stack.phase is FlightPhase.FLYING
        if action.kind == "land":
            return stack.phase is FlightPhase.ON_GROUND
        if action.kind in ("velocity", "keep", "wait"):
            return now - self.started_t >= action.duration
        if action.kind in ("sweep", "vertical", "go_home"):
            return self._mission_done
        return True  # inspection_mode: immediate

    def _end(self, stack: ControlStack, action: ScriptAction) -> None:
        if action.kind == "velocity":
            stack.set_velocity(0.0, 0.0, 0.0, 0.0)
        elif action.kind == "keep":
            stack.release_keep()
