"""Operator session server: one vehicle, one client, two queues.

The control loop runs in its own thread at simulated real time and
never blocks on the network: inbound messages land on an unbounded
command queue (commands are never dropped) and outbound messages go
through a bounded data lane that sheds the oldest telemetry first.
Acks, events, errors, and plan updates ride an unbounded control lane
so feedback is never lost either.

Transport is autodetected per connection: an HTTP upgrade request gets
the WebSocket codec, anything else is treated as raw newline-delimited
JSON. Both carry the same messages.
"""

from __future__ import annotations

import queue
import socket
import threading
import time
from pathlib import Path

from ..sim.world import load_world
from .config import load_config
from .protocol import (
    ProtocolError,
    ack_message,
    apply_message,
    encode,
    error_message,
    event_message,
    parse_message,
    plan_message,
    scan_message,
    telemetry_message,
    websocket_handshake_response,
    ws_frame,
    WsDecoder,
)
from .stack import ControlStack

TELEMETRY_EVERY_N_SIM_TICKS = 5  # 20 Hz on the wire
DATA_LANE_MAX = 256


class _OutQueue:
    """Two-lane outbound queue: control messages are never dropped,
    data messages (telemetry, scans) shed oldest on overflow."""

    def __init__(self, data_max: int = DATA_LANE_MAX):
        self._control: list[dict] = []
        self._data: list[dict] = []
        self._data_max = data_max
        self._cond = threading.Condition()
        self.dropped = 0

    def put_control(self, msg: dict) -> None:
        with self._cond:
            self._control.append(msg)
            self._cond.notify()

    def put_data(self, msg: dict) -> None:
        with self._cond:
            self._data.append(msg)
            if len(self._data) > self._data_max:
                del self._data[0]
                self.dropped += 1
            self._cond.notify()

    def drain(self, timeout: float) -> list[dict]:
        with self._cond:
            if not self._control and not self._data:
                self._cond.wait(timeout)
            out = self._control + self._data
            self._control = []
            self._data = []
            return out

    def clear(self) -> None:
        with self._cond:
            self._control = []
            self._data = []


class _Session:
    """One connected operator; owns transport framing for its socket."""

    def __init__(self, sock: socket.socket):
        self.sock = sock
        self.websocket = False
        self.alive = True
        self._send_lock = threading.Lock()

    def send(self, msg: dict) -> None:
        payload = encode(msg)
        data = ws_frame(payload) if self.websocket else payload
        with self._send_lock:
            self.sock.sendall(data)

    def close(self) -> None:
        self.alive = False
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.sock.close()


class OperatorServer:
    def __init__(
        self,
        world_path: str | Path,
        seed: int,
        port: int,
        host: str = "127.0.0.1",
        config_path: str | Path | None = None,
        start: tuple[float, float, float] = (0.0, 0.0, 0.0),
        fast: bool = False,
    ):
        world = load_world(world_path)
        config = load_config(config_path, world)
        self.stack = ControlStack(world, config, seed, start=start, heartbeat_monitor=True)
        self.fast = fast
        self._commands: queue.Queue = queue.Queue()
        self._out = _OutQueue()
        self._session: _Session | None = None
        self._session_lock = threading.Lock()
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((host, port))
        self._listener.listen(2)
        self.host, self.port = self._listener.getsockname()
        self._last_scan_id = 0
        self._last_plan_key = None

    # -- lifecycle ------------------------------------------------------

    def start(self) -> None:
        for target in (self._control_loop, self._accept_loop, self._writer_loop):
            th = threading.Thread(target=target, daemon=True)
            th.start()
            self._threads.append(th)

    def stop(self) -> None:
        self._stop.set()
        try:
            self._listener.close()
        except OSError:
            pass
        with self._session_lock:
            if self._session is not None:
                self._session.close()
                self._session = None
        for th in self._threads:
            th.join(timeout=2.0)

    def serve_forever(self) -> None:
        self.start()
        try:
            while not self._stop.is_set():
                time.sleep(0.2)
        except KeyboardInterrupt:
            pass
        finally:
            self.stop()

    # -- control thread ---------------------------------------------------

    def _control_loop(self) -> None:
        wall_start = time.monotonic()
        while not self._stop.is_set():
            control_tick = self.stack.tick()
            if control_tick:
                self._apply_pending_commands()
                for ev in self.stack.drain_events():
                    self._out.put_control(event_message(ev))
                self._maybe_send_plan()
            if self.stack.tick_count % TELEMETRY_EVERY_N_SIM_TICKS == 0:
                self._out.put_data(telemetry_message(self.stack))
            scan = self.stack.scan
            if scan is not None and id(scan) != self._last_scan_id:
                self._last_scan_id = id(scan)
                msg = scan_message(self.stack)
                if msg is not None:
                    self._out.put_data(msg)
            if not self.fast:
                lag = self.stack.sim.t - (time.monotonic() - wall_start)
                if lag > 0.002:
                    time.sleep(lag)

    def _apply_pending_commands(self) -> None:
        while True:
            try:
                item = self._commands.get_nowait()
            except queue.Empty:
                return
            kind, payload = item
            if kind == "malformed":
                self._out.put_control(error_message(payload))
                continue
            msg = payload
            try:
                ok, detail = apply_message(self.stack, msg)
            except ProtocolError as e:
                ok, detail = False, str(e)
            if msg["type"] != "heartbeat":
                self._out.put_control(ack_message(msg.get("id"), ok, detail))

    def _maybe_send_plan(self) -> None:
        plan = self.stack.missions.plan
        key = None if plan is None else (plan.kind.value, len(plan.waypoints), plan.progress)
        if key != self._last_plan_key:
            self._last_plan_key = key
            self._out.put_control(plan_message(self.stack))

    # -- writer thread ------------------------------------------------------

    def _writer_loop(self) -> None:
        while not self._stop.is_set():
            messages = self._out.drain(timeout=0.1)
            with self._session_lock:
                session = self._session
            if session is None or not session.alive:
                continue
            try:
                for msg in messages:
                    session.send(msg)
            except OSError:
                self._drop_session(session)

    # -- accept/reader threads ------------------------------------------------

    def _accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                sock, _ = self._listener.accept()
            except OSError:
                return
            with self._session_lock:
                busy = self._session is not None and self._session.alive
            if busy:
                try:
                    sock.sendall(encode(error_message("session busy: one operator allowed")))
                    sock.close()
                except OSError:
                    pass
                continue
            session = _Session(sock)
            with self._session_lock:
                self._session = session
            self._out.clear()
            threading.Thread(target=self._reader_loop, args=(session,), daemon=True).start()

    def _drop_session(self, session: _Session) -> None:
        session.close()
        with self._session_lock:
            if self._session is session:
                self._session = None

    def _reader_loop(self, session: _Session) -> None:
        sock = session.sock
        buf = bytearray()
        try:
            # Transport autodetect on the first bytes.
            while b"\n" not in buf and b"\r\n\r\n" not in buf:
                chunk = sock.recv(4096)
                if not chunk:
                    self._drop_session(session)
                    return
                buf.extend(chunk)
                if not buf.startswith(b"GET") and b"\n" in buf:
                    break
            if buf.startswith(b"GET"):
                while b"\r\n\r\n" not in buf:
                    chunk = sock.recv(4096)
                    if not chunk:
                        self._drop_session(session)
                        return
                    buf.extend(chunk)
                head, _, rest = bytes(buf).partition(b"\r\n\r\n")
                try:
                    sock.sendall(websocket_handshake_response(head))
                except ProtocolError as e:
                    sock.sendall(b"HTTP/1.1 400 Bad Request\r\n\r\n" + str(e).encode())
                    self._drop_session(session)
                    return
                session.websocket = True
                self._ws_reader(session, rest)
            else:
                self._raw_reader(session, bytes(buf))
        except OSError:
            self._drop_session(session)

    def _raw_reader(self, session: _Session, initial: bytes) -> None:
        buf = bytearray(initial)
        while session.alive and not self._stop.is_set():
            while b"\n" in buf:
                line, _, tail = bytes(buf).partition(b"\n")
                buf = bytearray(tail)
                self._enqueue_line(line)
            chunk = session.sock.recv(4096)
            if not chunk:
                break
            buf.extend(chunk)
        self._drop_session(session)

    def _ws_reader(self, session: _Session, initial: bytes) -> None:
        decoder = WsDecoder()
        pending = decoder.feed(initial) if initial else []
        while session.alive and not self._stop.is_set():
            for opcode, payload in pending:
                if opcode == 0x8:  # close
                    self._drop_session(session)
                    return
                if opcode == 0x9:  # ping
                    with session._send_lock:
                        session.sock.sendall(ws_frame(payload, opcode=0xA))
                elif opcode in (0x1, 0x2):
                    for line in payload.splitlines():
                        if line.strip():
                            self._enqueue_line(line)
            chunk = session.sock.recv(4096)
            if not chunk:
                break
            pending = decoder.feed(chunk)
        self._drop_session(session)

    def _enqueue_line(self, line: bytes) -> None:
        if not line.strip():
            return
        try:
            msg = parse_message(line)
        except ProtocolError as e:
            self._commands.put(("malformed", str(e)))
            return
        self._commands.put(("message", msg))


def serve(
    world_path: str | Path,
    seed: int,
    port: int,
    host: str = "127.0.0.1",
    config_path: str | Path | None = None,
    start: tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> None:
    server = OperatorServer(world_path, seed, port, host=host, config_path=config_path, start=start)
    print(f"listening on {server.host}:{server.port}")
    server.serve_forever()
