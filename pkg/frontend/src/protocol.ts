/**
 * Wire protocol v1 client implementation.
 *
 * Mirrors the gateway exactly: versioned envelope, strict field validation,
 * and invariant guards (frame pressures <= 70 psi, command targets <= 60 psi).
 * encode/decode are bijective over the schema; unknown fields are rejected.
 */

export const PROTOCOL_VERSION = 1;

export const PAM_NAMES = ["elbow", "shoulder", "shoulder_aux"] as const;
export type PamName = (typeof PAM_NAMES)[number];

export const MUSCLE_NAMES = [
  "biceps",
  "triceps",
  "medial_deltoid",
  "latissimus_dorsi",
] as const;
export type MuscleName = (typeof MUSCLE_NAMES)[number];

export const CLASS_NAMES = ["rest", "onset", "activation"] as const;
export type ClassName = (typeof CLASS_NAMES)[number];

export const ROLES = ["control", "observe"] as const;
export type Role = (typeof ROLES)[number];

export const FRAME_PRESSURE_MAX = 70;
export const COMMAND_PRESSURE_MAX = 60;

export interface HelloBody {
  role: Role;
  client?: string;
  session?: string;
}

export interface TelemetryBody {
  t_ms: number;
  pressures_psi: Record<PamName, number>;
  fsm_state: string;
  classes?: Partial<Record<MuscleName, ClassName>>;
  probs?: Partial<Record<MuscleName, number[]>>;
  emg_mv?: Partial<Record<MuscleName, number[] | number>>;
  motion?: string | null;
}

export type CommandKind =
  | "set_pressure"
  | "pause_all"
  | "vent_all"
  | "resume_auto"
  | "start_scenario";

export interface CommandBody {
  kind: CommandKind;
  pam?: PamName;
  psi?: number;
  name?: string;
  issued_t_ms?: number;
}

export interface ErrorBody {
  message: string;
  code?: string;
}

export type Message =
  | { v: 1; type: "hello"; body: HelloBody }
  | { v: 1; type: "telemetry"; body: TelemetryBody }
  | { v: 1; type: "command"; body: CommandBody }
  | { v: 1; type: "error"; body: ErrorBody };

export class ProtocolError extends Error {}

function isObject(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function requireKeys(
  obj: Record<string, unknown>,
  required: string[],
  optional: string[],
  where: string,
): void {
  for (const key of required) {
    if (!(key in obj)) throw new ProtocolError(`${where}: missing field ${key}`);
  }
  const allowed = new Set([...required, ...optional]);
  for (const key of Object.keys(obj)) {
    if (!allowed.has(key)) {
      throw new ProtocolError(`${where}: unknown field ${key}`);
    }
  }
}

function checkNumber(value: unknown, where: string, lo?: number, hi?: number): void {
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new ProtocolError(`${where}: expected a finite number`);
  }
  if (lo !== undefined && value < lo) {
    throw new ProtocolError(`${where}: ${value} below ${lo}`);
  }
  if (hi !== undefined && value > hi) {
    throw new ProtocolError(`${where}: ${value} above ${hi}`);
  }
}

function validateHello(body: Record<string, unknown>): void {
  requireKeys(body, ["role"], ["client", "session"], "hello body");
  if (!ROLES.includes(body.role as Role)) {
    throw new ProtocolError(`hello: role must be one of ${ROLES.join(", ")}`);
  }
}

function validateTelemetry(body: Record<string, unknown>): void {
  requireKeys(
    body,
    ["t_ms", "pressures_psi", "fsm_state"],
    ["classes", "probs", "emg_mv", "motion"],
    "telemetry body",
  );
  checkNumber(body.t_ms, "telemetry t_ms", 0);
  if (!isObject(body.pressures_psi)) {
    throw new ProtocolError("telemetry: pressures_psi must be an object");
  }
  requireKeys(body.pressures_psi, [...PAM_NAMES], [], "pressures_psi");
  for (const pam of PAM_NAMES) {
    checkNumber(body.pressures_psi[pam], `pressure ${pam}`, 0, FRAME_PRESSURE_MAX);
  }
  if (typeof body.fsm_state !== "string") {
    throw new ProtocolError("telemetry: fsm_state must be a string");
  }
  if (body.classes !== undefined) {
    if (!isObject(body.classes)) throw new ProtocolError("telemetry: bad classes");
    for (const [muscle, cls] of Object.entries(body.classes)) {
      if (!MUSCLE_NAMES.includes(muscle as MuscleName)) {
        throw new ProtocolError(`telemetry: unknown muscle ${muscle}`);
      }
      if (!CLASS_NAMES.includes(cls as ClassName)) {
        throw new ProtocolError(`telemetry: unknown class ${String(cls)}`);
      }
    }
  }
  if (body.probs !== undefined) {
    if (!isObject(body.probs)) throw new ProtocolError("telemetry: bad probs");
    for (const [muscle, probs] of Object.entries(body.probs)) {
      if (!MUSCLE_NAMES.includes(muscle as MuscleName)) {
        throw new ProtocolError(`telemetry: unknown muscle ${muscle}`);
      }
      if (!Array.isArray(probs) || probs.length !== 3) {
        throw new ProtocolError("telemetry: probs must have 3 entries");
      }
      for (const p of probs) checkNumber(p, "telemetry prob", 0, 1);
    }
  }
  if (body.emg_mv !== undefined) {
    if (!isObject(body.emg_mv)) throw new ProtocolError("telemetry: bad emg_mv");
    for (const [muscle, values] of Object.entries(body.emg_mv)) {
      if (!MUSCLE_NAMES.includes(muscle as MuscleName)) {
        throw new ProtocolError(`telemetry: unknown muscle ${muscle}`);
      }
      const seq = Array.isArray(values) ? values : [values];
      for (const v of seq) checkNumber(v, "telemetry emg sample");
    }
  }
  if (body.motion !== undefined && body.motion !== null) {
    if (typeof body.motion !== "string") {
      throw new ProtocolError("telemetry: motion must be a string or null");
    }
  }
}

const COMMAND_KINDS: CommandKind[] = [
  "set_pressure",
  "pause_all",
  "vent_all",
  "resume_auto",
  "start_scenario",
];

function validateCommand(body: Record<string, unknown>): void {
  requireKeys(body, ["kind"], ["pam", "psi", "name", "issued_t_ms"], "command body");
  const kind = body.kind as CommandKind;
  if (!COMMAND_KINDS.includes(kind)) {
    throw new ProtocolError(`command: unknown kind ${String(body.kind)}`);
  }
  if (kind === "set_pressure") {
    if (!("pam" in body) || !("psi" in body)) {
      throw new ProtocolError("set_pressure needs pam and psi");
    }
    if (!PAM_NAMES.includes(body.pam as PamName)) {
      throw new ProtocolError(`command: unknown PAM ${String(body.pam)}`);
    }
    checkNumber(body.psi, "command psi", 0, COMMAND_PRESSURE_MAX);
  } else if (kind === "start_scenario") {
    if (typeof body.name !== "string" || body.name.length === 0) {
      throw new ProtocolError("start_scenario needs a name");
    }
  }
  if (body.issued_t_ms !== undefined) {
    checkNumber(body.issued_t_ms, "command issued_t_ms", 0);
  }
}

function validateError(body: Record<string, unknown>): void {
  requireKeys(body, ["message"], ["code"], "error body");
  if (typeof body.message !== "string") {
    throw new ProtocolError("error: message must be a string");
  }
}

export function validateMessage(msg: unknown): Message {
  if (!isObject(msg)) throw new ProtocolError("message: expected an object");
  requireKeys(msg, ["v", "type", "body"], [], "message");
  if (msg.v !== PROTOCOL_VERSION) {
    throw new ProtocolError(
      `unsupported protocol version ${String(msg.v)}; expected ${PROTOCOL_VERSION}`,
    );
  }
  if (!isObject(msg.body)) throw new ProtocolError("message: body must be an object");
  switch (msg.type) {
    case "hello":
      validateHello(msg.body);
      break;
    case "telemetry":
      validateTelemetry(msg.body);
      break;
    case "command":
      validateCommand(msg.body);
      break;
    case "error":
      validateError(msg.body);
      break;
    default:
      throw new ProtocolError(`unknown message type ${String(msg.type)}`);
  }
  return msg as Message;
}

export function encode(msg: Message): string {
  validateMessage(msg);
  return JSON.stringify(msg);
}

export function decode(data: string): Message {
  let parsed: unknown;
  try {
    parsed = JSON.parse(data);
  } catch (exc) {
    throw new ProtocolError(`malformed JSON: ${String(exc)}`);
  }
  return validateMessage(parsed);
}

export function hello(role: Role, client = "exosim-console"): Message {
  return { v: 1, type: "hello", body: { role, client } };
}

export function command(body: CommandBody): Message {
  return { v: 1, type: "command", body };
}

/** Clamp a requested pressure into the command envelope before sending. */
export function clampCommandPsi(psi: number): number {
  return Math.min(COMMAND_PRESSURE_MAX, Math.max(0, psi));
}
