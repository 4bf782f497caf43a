"""Telemetry/command gateway: streams the live simulation to clients.

The simulation advances in a background thread, paced 1:1 against the wall
clock. Telemetry frames fan out to every connected client at the simulated
10 Hz cadence; operator commands flow back through a serialized queue into
the motion controller. One control client at a time; observers are
unlimited and their command messages are rejected at the protocol boundary.

Transports: newline-delimited JSON over TCP, and the same messages over
WebSocket for browser clients.
"""

from __future__ import annotations

import queue
import socket
import socketserver
import threading
import time

from . import protocol
from .loop import BUILTIN_SCENARIOS, LatencyConfig, Scenario, Simulation
COMMAND_TO_FSM = {
    "pause_all": ("pause_all",),
    "vent_all": ("vent_all",),
    "resume_auto": ("resume_auto",),
}


class SimulationService:
    """Owns the simulation thread and the command/telemetry queues."""

    def __init__(
        self,
        scenario: Scenario | None = None,
        latency: LatencyConfig = LatencyConfig(),
        seed: int = 42,
        speed: float = 1.0,
        models=None,
    ):
        scenario = scenario or BUILTIN_SCENARIOS["idle"]()
        classifier = None
        if models:
            from .loop import ModelClassifier

            classifier = ModelClassifier(models)
        self.sim = Simulation(scenario, latency, seed, classifier=classifier)
        self.speed = speed
        self.commands: queue.Queue = queue.Queue()
        self.subscribers: list[queue.Queue] = []
        self._sub_lock = threading.Lock()
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        self._event_idx = 0

    # -- pub/sub ------------------------------------------------------------

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=64)
        with self._sub_lock:
            self.subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue):
        with self._sub_lock:
            if q in self.subscribers:
                self.subscribers.remove(q)

    def _broadcast(self, msg: dict):
        with self._sub_lock:
            subs = list(self.subscribers)
        for q in subs:
            try:
                q.put_nowait(msg)
            except queue.Full:
                # Slow client: drop the oldest frame, keep ordering.
                try:
                    q.get_nowait()
                except queue.Empty:
                    pass
                try:
                    q.put_nowait(msg)
                except queue.Full:
                    pass

    def submit_command(self, body: dict):
        self.commands.put(body)

    # -- simulation pump ----------------------------------------------------

    def _drain_commands(self):
        while True:
            try:
                body = self.commands.get_nowait()
            except queue.Empty:
                return
            kind = body["kind"]
            if kind in COMMAND_TO_FSM:
                self.sim.inject_operator(COMMAND_TO_FSM[kind])
            elif kind == "set_pressure":
                self.sim.inject_operator(
                    ("set_pressure", body["pam"], float(body["psi"]))
                )
            # start_scenario is handled at the CLI/service level; a running
            # service keeps its scenario.

    def _flush_telemetry(self):
        events = self.sim.events
        while self._event_idx < len(events):
            ev = events[self._event_idx]
            self._event_idx += 1
            if ev.kind != "telemetry":
                continue
            frame = protocol.telemetry_frame(
                t_ms=ev.t_ms,
                pressures_psi=ev.payload["pressures_psi"],
                fsm_state=ev.payload["fsm_state"],
                classes=ev.payload.get("classes"),
                probs=ev.payload.get("probs") or None,
                emg_mv={m: [v] for m, v in ev.payload["emg_mv"].items()},
                motion=ev.payload.get("motion"),
            )
            self._broadcast(frame)

    def _pump(self):
        wall_start = time.monotonic()
        self.sim.prepare()
        while not self._stop.is_set():
            elapsed_ms = (time.monotonic() - wall_start) * 1000.0 * self.speed
            self._drain_commands()
            self.sim.step_until(elapsed_ms)
            self._flush_telemetry()
            if elapsed_ms >= self.sim.scenario.duration_ms:
                break
            time.sleep(0.02)

    def start(self):
        self._thread = threading.Thread(target=self._pump, daemon=True)
        self._thread.start()

    def stop(self):
        self._stop.set()
        if self._thread:
            self._thread.join(timeout=2.0)


class GatewayHub:
    """Role bookkeeping: one control client, any number of observers."""

    def __init__(self, service: SimulationService):
        self.service = service
        self._lock = threading.Lock()
        self._control_taken = False

    def claim_role(self, role: str) -> tuple[bool, str]:
        if role == "observe":
            return True, "observe"
        with self._lock:
            if self._control_taken:
                return False, "control role already taken; reconnect as observe"
            self._control_taken = True
            return True, "control"

    def release_role(self, role: str):
        if role == "control":
            with self._lock:
                self._control_taken = False

    def handle_command(self, msg: dict, role: str) -> dict | None:
        """Validate and route one command; returns an error message or None."""
        if role != "control":
            return protocol.error_message(
                "command rejected: session is read-only", code="forbidden"
            )
        if msg["body"]["kind"] == "start_scenario":
            return protocol.error_message(
                "scenario switching requires restarting the service",
                code="unsupported",
            )
        self.service.submit_command(msg["body"])
        return None


class _ClientHandler(socketserver.StreamRequestHandler):
    """One TCP client: hello handshake, then command reads + telemetry writes."""

    def handle(self):
        hub: GatewayHub = self.server.hub  # type: ignore[attr-defined]
        role = None
        sub = None
        writer_stop = threading.Event()
        try:
            line = self.rfile.readline()
            if not line:
                return
            try:
                msg = protocol.decode(line)
                if msg["type"] != "hello":
                    raise protocol.ProtocolError("first message must be hello")
            except protocol.ProtocolError as exc:
                self._send(protocol.error_message(str(exc), code="bad_hello"))
                return
            ok, detail = hub.claim_role(msg["body"]["role"])
            if not ok:
                self._send(protocol.error_message(detail, code="role_taken"))
                return
            role = detail
            self._send(protocol.hello(role=role, client="exosim-gateway"))

            sub = hub.service.subscribe()
            writer = threading.Thread(
                target=self._writer_loop, args=(sub, writer_stop), daemon=True
            )
            writer.start()

            for line in self.rfile:
                line = line.strip()
                if not line:
                    continue
                try:
                    msg = protocol.decode(line)
                except protocol.ProtocolError as exc:
                    self._send(protocol.error_message(str(exc), code="bad_message"))
                    continue
                if msg["type"] == "command":
                    err = hub.handle_command(msg, role)
                    if err is not None:
                        self._send(err)
                else:
                    self._send(
                        protocol.error_message(
                            f"unexpected message type {msg['type']!r}",
                            code="bad_message",
                        )
                    )
        finally:
            writer_stop.set()
            if sub is not None:
                hub.service.unsubscribe(sub)
            if role is not None:
                hub.release_role(role)
            self.server.write_locks.pop(self.request, None)  # type: ignore[attr-defined]

    def _writer_loop(self, sub: queue.Queue, stop: threading.Event):
        while not stop.is_set():
            try:
                msg = sub.get(timeout=0.1)
            except queue.Empty:
                continue
            try:
                self._send(msg)
            except OSError:
                return

    def _send(self, msg: dict):
        with self.server.write_locks.setdefault(self.request, threading.Lock()):  # type: ignore[attr-defined]
            self.wfile.write(protocol.encode(msg) + b"\n")
            self.wfile.flush()


class GatewayServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, addr, service: SimulationService):
        super().__init__(addr, _ClientHandler)
        self.hub = GatewayHub(service)
        self.write_locks: dict = {}


def serve(
    scenario: Scenario | None = None,
    host: str = "127.0.0.1",
    port: int = 8765,
    ws_port: int | None = None,
    latency: LatencyConfig = LatencyConfig(),
    seed: int = 42,
    speed: float = 1.0,
    models=None,
    ready: threading.Event | None = None,
    stop: threading.Event | None = None,
):
    """Run the gateway until the scenario ends or ``stop`` is set.

    Listens for NDJSON clients on (host, port) and, when ``ws_port`` is
    given, for WebSocket clients speaking the identical protocol.
    """
    service = SimulationService(scenario, latency, seed, speed, models)
    server = GatewayServer((host, port), service)
    threads = [threading.Thread(target=server.serve_forever, daemon=True)]

    ws_server = None
    if ws_port is not None:
        ws_server = _start_ws(service, server.hub, host, ws_port)

    service.start()
    for t in threads:
        t.start()
    if ready is not None:
        ready.set()
    try:
        while service._thread and service._thread.is_alive():
            if stop is not None and stop.is_set():
                break
            time.sleep(0.05)
    finally:
        service.stop()
        server.shutdown()
        server.server_close()
        if ws_server is not None:
            ws_server.shutdown()
    return service


def _start_ws(service: SimulationService, hub: GatewayHub, host: str, port: int):
    """WebSocket listener sharing the hub; one protocol message per WS frame."""
    from websockets.sync.server import serve as ws_serve

    def handler(conn):
        role = None
        sub = None
        stop_writer = threading.Event()
        try:
            raw = conn.recv()
            msg = protocol.decode(raw)
            if msg["type"] != "hello":
                raise protocol.ProtocolError("first message must be hello")
            ok, detail = hub.claim_role(msg["body"]["role"])
            if not ok:
                conn.send(protocol.encode(
                    protocol.error_message(detail, code="role_taken")).decode())
                return
            role = detail
            conn.send(protocol.encode(
                protocol.hello(role=role, client="exosim-gateway")).decode())
            sub = service.subscribe()

            def writer():
                while not stop_writer.is_set():
                    try:
                        frame = sub.get(timeout=0.1)
                    except queue.Empty:
                        continue
                    try:
                        conn.send(protocol.encode(frame).decode())
                    except Exception:
                        return

            threading.Thread(target=writer, daemon=True).start()
            for raw in conn:
                try:
                    msg = protocol.decode(raw)
                except protocol.ProtocolError as exc:
                    conn.send(protocol.encode(
                        protocol.error_message(str(exc), code="bad_message")
                    ).decode())
                    continue
                if msg["type"] == "command":
                    err = hub.handle_command(msg, role)
                    if err is not None:
                        conn.send(protocol.encode(err).decode())
        except protocol.ProtocolError as exc:
            try:
                conn.send(protocol.encode(
                    protocol.error_message(str(exc), code="bad_hello")).decode())
            except Exception:
                pass
        finally:
            stop_writer.set()
            if sub is not None:
                service.unsubscribe(sub)
            if role is not None:
                hub.release_role(role)

    server = ws_serve(handler, host, port)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    return server
