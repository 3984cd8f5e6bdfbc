"""Wire protocol: newline-delimited JSON messages, one schema for
plain TCP and WebSocket transports.

Downstream (operator to vehicle): takeoff, land, velocity, inspection_mode,
start_sweep, start_vertical, go_home, set_home, abort_mission, heartbeat.
Upstream (vehicle to operator): telemetry, scan, plan, event, ack, error.

Every downstream message may carry an "id"; the matching ack echoes it
as "ref" so a client can reconcile its command journal.
"""

from __future__ import annotations

import base64
import hashlib
import json
import math
import struct

from .stack import ControlStack


class ProtocolError(ValueError):
    pass


_NUMBER = "number"
_BOOL = "bool"

# type -> {field: (kind, required, default)}
DOWNSTREAM: dict[str, dict] = {
    "takeoff": {},
    "land": {},
    "velocity": {
        "vx": (_NUMBER, False, 0.0),
        "vy": (_NUMBER, False, 0.0),
        "vz": (_NUMBER, False, 0.0),
        "yaw_rate": (_NUMBER, False, 0.0),
    },
    "inspection_mode": {"on": (_BOOL, True, None)},
    "start_sweep": {
        "width": (_NUMBER, False, 0.0),
        "height": (_NUMBER, True, None),
        "spacing": (_NUMBER, False, 1.0),
        "end_to_end": (_BOOL, False, False),
    },
    "start_vertical": {
        "max_height": (_NUMBER, True, None),
        "offset": (_NUMBER, False, 1.0),
        "bearing": (_NUMBER, False, 0.0),
    },
    "go_home": {},
    "set_home": {
        "x": (_NUMBER, True, None),
        "y": (_NUMBER, True, None),
        "z": (_NUMBER, True, None),
    },
    "abort_mission": {},
    "heartbeat": {},
}


def parse_message(line: str | bytes) -> dict:
    """One downstream NDJSON line to a validated message dict."""
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as e:
        raise ProtocolError(f"not valid JSON: {e.msg}") from None
    if not isinstance(msg, dict):
        raise ProtocolError("message must be a JSON object")
    kind = msg.get("type")
    if kind not in DOWNSTREAM:
        raise ProtocolError(f"unknown message type {kind!r}")
    out = {"type": kind}
    if "id" in msg:
        out["id"] = msg["id"]
    for name, (want, required, default) in DOWNSTREAM[kind].items():
        if name not in msg:
            if required:
                raise ProtocolError(f"{kind}: missing field {name!r}")
            out[name] = default
            continue
        value = msg[name]
        if want == _NUMBER:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ProtocolError(f"{kind}.{name}: expected a number")
            value = float(value)
            if not math.isfinite(value):
                raise ProtocolError(f"{kind}.{name}: must be finite")
        elif want == _BOOL and not isinstance(value, bool):
            raise ProtocolError(f"{kind}.{name}: expected true/false")
        out[name] = value
    return out


def apply_message(stack: ControlStack, msg: dict) -> tuple[bool, str]:
    """Route a validated message into the stack's request API."""
    kind = msg["type"]
    stack.note_message()
    if kind == "heartbeat":
        return True, ""
    if kind == "takeoff":
        return stack.request_takeoff()
    if kind == "land":
        return stack.request_land()
    if kind == "velocity":
        return stack.set_velocity(msg["vx"], msg["vy"], msg["vz"], msg["yaw_rate"])
    if kind == "inspection_mode":
        return stack.set_inspection(msg["on"])
    if kind == "start_sweep":
        return stack.request_sweep(msg["width"], msg["height"], msg["spacing"], msg["end_to_end"])
    if kind == "start_vertical":
        return stack.request_vertical(msg["max_height"], msg["offset"], msg["bearing"])
    if kind == "go_home":
        return stack.request_go_home()
    if kind == "set_home":
        return stack.set_home(msg["x"], msg["y"], msg["z"])
    if kind == "abort_mission":
        return stack.request_abort_mission()
    raise ProtocolError(f"unroutable message type {kind!r}")


# -- upstream builders -------------------------------------------------


def _r(v: float, digits: int = 4) -> float:
    return round(float(v), digits)


def telemetry_message(stack: ControlStack) -> dict:
    s = stack.state
    truth = stack.sim.truth
    return {
        "type": "telemetry",
        "t": _r(stack.sim.t, 3),
        "phase": stack.phase.value,
        "est": {
            "x": _r(s.x),
            "y": _r(s.y),
            "z": _r(s.z),
            "psi": _r(s.yaw),
            "vx": _r(s.vx),
            "vy": _r(s.vy),
            "vz": _r(s.vz),
        },
        "truth": {
            "x": _r(truth.position[0]),
            "y": _r(truth.position[1]),
            "z": _r(truth.position[2]),
            "psi": _r(truth.yaw),
        },
        "battery": _r(truth.battery_fraction),
        "verdict": stack.verdict.name.lower().replace("_", "-"),
        "behaviors": {name: _r(a, 3) for name, a in stack.activations.items()},
        "cmd": {
            "vx": _r(stack.cmd.vx),
            "vy": _r(stack.cmd.vy),
            "vz": _r(stack.cmd.vz),
            "yaw_rate": _r(stack.cmd.yaw_rate),
        },
        "mission": stack.missions.describe(),
        "min_obstacle_d": _r(stack.min_obstacle_d),
        "inspection_mode": stack.inspection_mode,
        "home": None
        if stack.home is None
        else {"x": _r(stack.home.x), "y": _r(stack.home.y), "z": _r(stack.home.z)},
    }


def scan_message(stack: ControlStack) -> dict | None:
    scan = stack.scan
    if scan is None:
        return None
    s = stack.state
    ranges = [None if not math.isfinite(r) else _r(r, 3) for r in scan.ranges]
    return {
        "type": "scan",
        "t": _r(scan.t, 3),
        "angle_min": _r(scan.angle_min, 6),
        "angle_increment": _r(scan.angle_increment, 8),
        "max_range": _r(scan.max_range, 3),
        "pose": {"x": _r(s.x), "y": _r(s.y), "psi": _r(s.yaw)},
        "ranges": ranges,
    }


def plan_message(stack: ControlStack) -> dict:
    plan = stack.missions.plan
    if plan is None:
        return {"type": "plan", "kind": None, "waypoints": [], "progress": 0}
    return {
        "type": "plan",
        "kind": plan.kind.value,
        "waypoints": [[_r(w.x), _r(w.y), _r(w.z), _r(w.yaw)] for w in plan.waypoints],
        "progress": plan.progress,
    }


def event_message(ev: dict) -> dict:
    return {"type": "event", **ev}


def ack_message(ref, ok: bool, detail: str = "") -> dict:
    msg = {"type": "ack", "ref": ref, "status": "ok" if ok else "rejected"}
    if detail:
        msg["detail"] = detail
    return msg


def error_message(detail: str) -> dict:
    return {"type": "error", "detail": detail}


def encode(msg: dict) -> bytes:
    return (json.dumps(msg, separators=(",", ":")) + "\n").encode()


# -- WebSocket framing (RFC 6455, server side) -------------------------

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


def websocket_accept(key: str) -> str:
    digest = hashlib.sha1((key + _WS_GUID).encode()).digest()
    return base64.b64encode(digest).decode()


def websocket_handshake_response(request: bytes) -> bytes:
    """101 response for an HTTP upgrade request, or raise ProtocolError."""
    try:
        head = request.decode("latin-1")
    except UnicodeDecodeError:
        raise ProtocolError("malformed handshake") from None
    key = None
    for line in head.split("\r\n")[1:]:
        name, _, value = line.partition(":")
        if name.strip().lower() == "sec-websocket-key":
            key = value.strip()
    if key is None:
        raise ProtocolError("missing Sec-WebSocket-Key")
    return (
        "HTTP/1.1 101 Switching Protocols\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Accept: {websocket_accept(key)}\r\n"
        "\r\n"
    ).encode()


def ws_frame(payload: bytes, opcode: int = 0x1) -> bytes:
    """Single unmasked server-to-client frame."""
    header = bytes([0x80 | opcode])
    n = len(payload)
    if n < 126:
        header += bytes([n])
    elif n < 1 << 16:
        header += bytes([126]) + struct.pack(">H", n)
    else:
        header += bytes([127]) + struct.pack(">Q", n)
    return header + payload


class WsDecoder:
    """Incremental client-to-server frame decoder.

    feed() returns a list of (opcode, payload) for each complete message;
    continuation frames are reassembled onto the initial opcode.
    """

    def __init__(self) -> None:
        self.buf = bytearray()
        self._fragments = bytearray()
        self._fragment_opcode: int | None = None

    def feed(self, data: bytes) -> list[tuple[int, bytes]]:
        self.buf.extend(data)
        out = []
        while True:
            frame = self._next_frame()
            if frame is None:
                return out
            fin, opcode, payload = frame
            if opcode == 0x0 and self._fragment_opcode is not None:
                self._fragments.extend(payload)
                if fin:
                    out.append((self._fragment_opcode, bytes(self._fragments)))
                    self._fragments.clear()
                    self._fragment_opcode = None
            elif not fin:
                self._fragment_opcode = opcode
                self._fragments = bytearray(payload)
            else:
                out.append((opcode, payload))

    def _next_frame(self) -> tuple[bool, int, bytes] | None:
        buf = self.buf
        if len(buf) < 2:
            return None
        fin = bool(buf[0] & 0x80)
        opcode = buf[0] & 0x0F
        masked = bool(buf[1] & 0x80)
        length = buf[1] & 0x7F
        offset = 2
        if length == 126:
            if len(buf) < 4:
                return None
            length = struct.unpack_from(">H", buf, 2)[0]
            offset = 4
        elif length == 127:
            if len(buf) < 10:
                return None
            length = struct.unpack_from(">Q", buf, 2)[0]
            offset = 10
        mask = b""
        if masked:
            if len(buf) < offset + 4:
                return None
            mask = bytes(buf[offset : offset + 4])
            offset += 4
        if len(buf) < offset + length:
            return None
        payload = bytes(buf[offset : offset + length])
        del buf[: offset + length]
        if masked:
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        return fin, opcode, payload
