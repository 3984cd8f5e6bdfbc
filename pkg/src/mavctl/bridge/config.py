"""Run configuration: one file exposing every tunable of the stack.

Sections mirror the layers: `behaviors` (limits), `control` (velocity
loop gains), `missions` (position-controller gains + planning defaults),
`flight` (takeoff/landing parameters). Every field is optional and
falls back to the library default. The resolved configuration is
hashable so a run manifest can pin it.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from ..behaviors import BehaviorLimits
from ..control import ControlGains, FlightParams
from ..missions import MissionGains
from ..sim.world import WorldModel


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MissionDefaults:
    """Planning parameters not carried by individual mission requests."""

    standoff: float = 2.0
    edge_margin: float = 0.5
    tolerance: float = 0.25


@dataclass(frozen=True)
class RunConfig:
    limits: BehaviorLimits
    gains: ControlGains
    mission_gains: MissionGains
    mission_defaults: MissionDefaults
    flight: FlightParams
    resolved: dict

    @property
    def hash(self) -> str:
        blob = json.dumps(self.resolved, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


_SECTIONS = {
    "behaviors": BehaviorLimits,
    "control": ControlGains,
    "missions": MissionGains,
    "mission_defaults": MissionDefaults,
    "flight": FlightParams,
}


def _build(cls, section: str, overrides: dict):
    defaults = cls()
    valid = {f.name for f in dataclasses.fields(cls)}
    unknown = set(overrides) - valid
    if unknown:
        raise ConfigError(f"{section}: unknown keys {sorted(unknown)}")
    coerced = {}
    for key, value in overrides.items():
        current = getattr(defaults, key)
        if isinstance(current, tuple):
            if not isinstance(value, (list, tuple)) or len(value) != len(current):
                raise ConfigError(f"{section}.{key}: expected {len(current)} numbers")
            coerced[key] = tuple(float(v) for v in value)
        elif isinstance(current, bool):
            coerced[key] = bool(value)
        else:
            try:
                coerced[key] = float(value)
            except (TypeError, ValueError):
                raise ConfigError(f"{section}.{key}: expected a number, got {value!r}") from None
    return dataclasses.replace(defaults, **coerced)


def _jsonable(obj) -> dict:
    out = {}
    for f in dataclasses.fields(obj):
        v = getattr(obj, f.name)
        if isinstance(v, tuple):
            v = list(v)
        elif isinstance(v, float) and math.isinf(v):
            v = None
        out[f.name] = v
    return out


def resolve_config(doc: dict | None, world: WorldModel) -> RunConfig:
    """Merge a config document over the defaults and pin world-derived values.

    z_max left unset means "as high as the ceiling allows": the minimum
    clearance d_min is reserved below the ceiling.
    """
    doc = doc or {}
    if not isinstance(doc, dict):
        raise ConfigError("configuration root must be an object")
    unknown = set(doc) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown sections {sorted(unknown)}")
    built = {
        name: _build(cls, name, doc.get(name, {}) or {})
        for name, cls in _SECTIONS.items()
    }
    limits: BehaviorLimits = built["behaviors"]
    if math.isinf(limits.z_max):
        limits = dataclasses.replace(limits, z_max=world.ceiling_height - limits.d_min)
    resolved = {
        "behaviors": _jsonable(limits),
        "control": _jsonable(built["control"]),
        "missions": _jsonable(built["missions"]),
        "mission_defaults": _jsonable(built["mission_defaults"]),
        "flight": _jsonable(built["flight"]),
    }
    return RunConfig(
        limits=limits,
        gains=built["control"],
        mission_gains=built["missions"],
        mission_defaults=built["mission_defaults"],
        flight=built["flight"],
        resolved=resolved,
    )


def load_config(path: str | Path | None, world: WorldModel) -> RunConfig:
    if path is None:
        return resolve_config(None, world)
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    return resolve_config(doc, world)
