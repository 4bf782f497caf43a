/**
 * Operator actions to wire commands. Client-side clamps mirror the server
 * guards so the console never emits a message violating protocol invariants.
 */

import {
  clampCommandPsi,
  command,
  type Message,
  type PamName,
} from "./protocol.js";
import type { UiSessionState } from "./state.js";

export type UiAction =
  | { kind: "slider_release"; pam: PamName; psi: number }
  | { kind: "vent_click" }
  | { kind: "pause_click" }
  | { kind: "resume_click" }
  | { kind: "start_scenario"; name: string };

/**
 * Map an operator action to a protocol command, or null when the session's
 * role does not permit sending commands.
 */
export function issueCommand(
  state: UiSessionState,
  action: UiAction,
  nowMs: number,
): Message | null {
  if (state.role !== "control") return null;
  switch (action.kind) {
    case "slider_release":
      return command({
        kind: "set_pressure",
        pam: action.pam,
        psi: clampCommandPsi(action.psi),
        issued_t_ms: nowMs,
      });
    case "vent_click":
      return command({ kind: "vent_all", issued_t_ms: nowMs });
    case "pause_click":
      return command({ kind: "pause_all", issued_t_ms: nowMs });
    case "resume_click":
      return command({ kind: "resume_auto", issued_t_ms: nowMs });
    case "start_scenario":
      return command({
        kind: "start_scenario",
        name: action.name,
        issued_t_ms: nowMs,
      });
  }
}
