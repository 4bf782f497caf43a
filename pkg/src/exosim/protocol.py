"""Wire protocol v1: versioned JSON messages over a bidirectional socket.

Envelope: {"v": 1, "type": "hello"|"telemetry"|"command"|"error", "body": {...}}.
Encoding is strict and bijective over the schema: unknown fields are rejected
on both encode and decode, the version tag is mandatory, and invariant guards
(pressure ranges) are enforced before anything touches a socket. Framing is
one JSON document per line on TCP; WebSocket transports send one document per
message.
"""

from __future__ import annotations

import json
import math

PROTOCOL_VERSION = 1

MESSAGE_TYPES = ("hello", "telemetry", "command", "error")
ROLES = ("control", "observe")
COMMAND_KINDS = ("set_pressure", "pause_all", "vent_all", "resume_auto",
                 "start_scenario")
PAM_NAMES = ("elbow", "shoulder", "shoulder_aux")
MUSCLE_NAMES = ("biceps", "triceps", "medial_deltoid", "latissimus_dorsi")
FRAME_PRESSURE_MAX = 70.0
COMMAND_PRESSURE_MAX = 60.0


class ProtocolError(ValueError):
    """Raised for schema violations, bad versions, or invariant breaches."""


def _require_keys(obj: dict, required: set, optional: set, where: str):
    if not isinstance(obj, dict):
        raise ProtocolError(f"{where}: expected an object")
    keys = set(obj)
    missing = required - keys
    if missing:
        raise ProtocolError(f"{where}: missing fields {sorted(missing)}")
    unknown = keys - required - optional
    if unknown:
        raise ProtocolError(f"{where}: unknown fields {sorted(unknown)}")


def _check_number(value, where: str, lo=None, hi=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProtocolError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, float) and not math.isfinite(value):
        raise ProtocolError(f"{where}: must be finite")
    if lo is not None and value < lo:
        raise ProtocolError(f"{where}: {value} below {lo}")
    if hi is not None and value > hi:
        raise ProtocolError(f"{where}: {value} above {hi}")


def _validate_hello(body: dict):
    _require_keys(body, {"role"}, {"client", "session"}, "hello body")
    if body["role"] not in ROLES:
        raise ProtocolError(f"hello: role must be one of {ROLES}")


def _validate_telemetry(body: dict):
    _require_keys(
        body,
        {"t_ms", "pressures_psi", "fsm_state"},
        {"classes", "probs", "emg_mv", "motion"},
        "telemetry body",
    )
    _check_number(body["t_ms"], "telemetry t_ms", lo=0)
    _require_keys(body["pressures_psi"], set(PAM_NAMES), set(), "pressures_psi")
    for pam_name in PAM_NAMES:
        _check_number(
            body["pressures_psi"][pam_name],
            f"pressure {pam_name}",
            lo=0.0,
            hi=FRAME_PRESSURE_MAX,
        )
    if not isinstance(body["fsm_state"], str):
        raise ProtocolError("telemetry: fsm_state must be a string")
    if "classes" in body:
        for muscle, cls in body["classes"].items():
            if muscle not in MUSCLE_NAMES:
                raise ProtocolError(f"telemetry: unknown muscle {muscle!r}")
            if cls not in ("rest", "onset", "activation"):
                raise ProtocolError(f"telemetry: unknown class {cls!r}")
    if "probs" in body:
        for muscle, probs in body["probs"].items():
            if muscle not in MUSCLE_NAMES:
                raise ProtocolError(f"telemetry: unknown muscle {muscle!r}")
            if len(probs) != 3:
                raise ProtocolError("telemetry: probs must have 3 entries")
            for p in probs:
                _check_number(p, "telemetry prob", lo=0.0, hi=1.0)
    if "emg_mv" in body:
        for muscle, values in body["emg_mv"].items():
            if muscle not in MUSCLE_NAMES:
                raise ProtocolError(f"telemetry: unknown muscle {muscle!r}")
            seq = values if isinstance(values, list) else [values]
            for v in seq:
                _check_number(v, "telemetry emg sample")
    if "motion" in body and body["motion"] is not None:
        if not isinstance(body["motion"], str):
            raise ProtocolError("telemetry: motion must be a string or null")


def _validate_command(body: dict):
    _require_keys(body, {"kind"}, {"pam", "psi", "name", "issued_t_ms"},
                  "command body")
    kind = body["kind"]
    if kind not in COMMAND_KINDS:
        raise ProtocolError(f"command: unknown kind {kind!r}")
    if kind == "set_pressure":
        if "pam" not in body or "psi" not in body:
            raise ProtocolError("set_pressure needs pam and psi")
        if body["pam"] not in PAM_NAMES:
            raise ProtocolError(f"command: unknown PAM {body['pam']!r}")
        _check_number(body["psi"], "command psi", lo=0.0, hi=COMMAND_PRESSURE_MAX)
    elif kind == "start_scenario":
        if "name" not in body or not isinstance(body["name"], str):
            raise ProtocolError("start_scenario needs a name")
    if "issued_t_ms" in body:
        _check_number(body["issued_t_ms"], "command issued_t_ms", lo=0)


def _validate_error(body: dict):
    _require_keys(body, {"message"}, {"code"}, "error body")
    if not isinstance(body["message"], str):
        raise ProtocolError("error: message must be a string")


_VALIDATORS = {
    "hello": _validate_hello,
    "telemetry": _validate_telemetry,
    "command": _validate_command,
    "error": _validate_error,
}


def validate_message(msg: dict) -> dict:
    """Validate the full envelope and body; returns the message unchanged."""
    _require_keys(msg, {"v", "type", "body"}, set(), "message")
    if msg["v"] != PROTOCOL_VERSION:
        raise ProtocolError(
            f"unsupported protocol version {msg['v']!r}; expected {PROTOCOL_VERSION}"
        )
    if msg["type"] not in MESSAGE_TYPES:
        raise ProtocolError(f"unknown message type {msg['type']!r}")
    _VALIDATORS[msg["type"]](msg["body"])
    return msg


def encode(msg: dict) -> bytes:
    """Serialize a validated message to compact JSON bytes (no framing)."""
    validate_message(msg)
    return json.dumps(msg, sort_keys=True, separators=(",", ":")).encode()


def decode(data: bytes | str) -> dict:
    """Parse and validate one message."""
    try:
        msg = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed JSON: {exc}") from exc
    return validate_message(msg)


def hello(role: str, client: str = "exosim") -> dict:
    return {"v": PROTOCOL_VERSION, "type": "hello",
            "body": {"role": role, "client": client}}


def error_message(message: str, code: str = "error") -> dict:
    return {"v": PROTOCOL_VERSION, "type": "error",
            "body": {"message": message, "code": code}}


def command(kind: str, **fields) -> dict:
    return {"v": PROTOCOL_VERSION, "type": "command",
            "body": {"kind": kind, **fields}}


def telemetry_frame(
    t_ms: float,
    pressures_psi: dict,
    fsm_state: str,
    classes: dict | None = None,
    probs: dict | None = None,
    emg_mv: dict | None = None,
    motion: str | None = None,
) -> dict:
    body = {
        "t_ms": t_ms,
        "pressures_psi": pressures_psi,
        "fsm_state": fsm_state,
        "motion": motion,
    }
    if classes is not None:
        body["classes"] = classes
    if probs is not None:
        body["probs"] = probs
    if emg_mv is not None:
        body["emg_mv"] = emg_mv
    return {"v": PROTOCOL_VERSION, "type": "telemetry", "body": body}
