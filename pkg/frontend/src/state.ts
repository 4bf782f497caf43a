/**
 * Console session state: connection, role, latest telemetry, pending
 * command acknowledgements. Pure reducers; the UI renders from snapshots.
 */

import type { Message, Role, TelemetryBody } from "./protocol.js";

export type ConnectionStatus = "disconnected" | "connecting" | "connected";

export interface PendingCommand {
  kind: string;
  sentAtMs: number;
}

export interface UiSessionState {
  connection: ConnectionStatus;
  role: Role | null;
  lastFrame: TelemetryBody | null;
  /** Wall-clock ms when the last frame arrived (staleness detection). */
  lastFrameAtMs: number | null;
  /** Commands awaiting the next telemetry frame (optimistic disable). */
  pending: PendingCommand[];
  lastError: string | null;
  manualMode: boolean;
  /** Rolling EMG window per muscle: [t_ms, mv] pairs, last ~10 s. */
  emgWindow: Record<string, Array<[number, number]>>;
}

export const EMG_WINDOW_MS = 10_000;

export function initialState(): UiSessionState {
  return {
    connection: "disconnected",
    role: null,
    lastFrame: null,
    lastFrameAtMs: null,
    pending: [],
    lastError: null,
    manualMode: false,
    emgWindow: {},
  };
}

export function onConnecting(state: UiSessionState): UiSessionState {
  return { ...state, connection: "connecting" };
}

export function onDisconnected(state: UiSessionState): UiSessionState {
  return { ...state, connection: "disconnected", role: null };
}

export function onMessage(
  state: UiSessionState,
  msg: Message,
  nowMs: number,
): UiSessionState {
  switch (msg.type) {
    case "hello":
      return {
        ...state,
        connection: "connected",
        role: msg.body.role,
        lastError: null,
      };
    case "telemetry": {
      const frame = msg.body;
      const emgWindow = { ...state.emgWindow };
      if (frame.emg_mv) {
        for (const [muscle, values] of Object.entries(frame.emg_mv)) {
          const seq = Array.isArray(values) ? values : [values ?? 0];
          const points = [...(emgWindow[muscle] ?? [])];
          for (const v of seq) points.push([frame.t_ms, v]);
          emgWindow[muscle] = points.filter(
            ([t]) => t >= frame.t_ms - EMG_WINDOW_MS,
          );
        }
      }
      const manualMode =
        frame.fsm_state === "ManualOverride" || frame.fsm_state === "EmergencyVent";
      return {
        ...state,
        lastFrame: frame,
        lastFrameAtMs: nowMs,
        pending: [], // a fresh frame acknowledges in-flight commands
        manualMode,
        emgWindow,
      };
    }
    case "error":
      return { ...state, lastError: msg.body.message, pending: [] };
    case "command":
      return state; // servers do not send commands; ignore defensively
  }
}

export function onCommandSent(
  state: UiSessionState,
  kind: string,
  nowMs: number,
): UiSessionState {
  return { ...state, pending: [...state.pending, { kind, sentAtMs: nowMs }] };
}

export function isStale(state: UiSessionState, nowMs: number): boolean {
  if (state.lastFrameAtMs === null) return state.connection === "connected";
  return nowMs - state.lastFrameAtMs > 1000;
}
