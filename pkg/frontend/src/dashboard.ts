/**
 * Dashboard view model: a pure function of the session state, so rendering
 * is testable against recorded telemetry without a live server.
 */

import {
  CLASS_NAMES,
  FRAME_PRESSURE_MAX,
  COMMAND_PRESSURE_MAX,
  MUSCLE_NAMES,
  PAM_NAMES,
  type ClassName,
  type MuscleName,
  type PamName,
} from "./protocol.js";
import { isStale, type UiSessionState } from "./state.js";

export interface GaugeView {
  pam: PamName;
  valuePsi: number;
  maxPsi: number;
  autoLimitPsi: number;
  /** 0..1 fill fraction of the dial. */
  fraction: number;
}

export interface MuscleView {
  muscle: MuscleName;
  klass: ClassName | "unknown";
  active: boolean;
}

export interface DashboardView {
  connectionBadge: string;
  roleBadge: string;
  fsmState: string;
  alert: "none" | "emergency";
  staleBanner: boolean;
  gauges: GaugeView[];
  muscles: MuscleView[];
  motion: string | null;
  controlsEnabled: boolean;
  pendingCount: number;
  errorToast: string | null;
  emg: Record<string, Array<[number, number]>>;
}

export function renderDashboard(
  state: UiSessionState,
  nowMs: number,
): DashboardView {
  const frame = state.lastFrame;
  const gauges: GaugeView[] = PAM_NAMES.map((pam) => {
    const value = frame ? frame.pressures_psi[pam] : 0;
    return {
      pam,
      valuePsi: value,
      maxPsi: FRAME_PRESSURE_MAX,
      autoLimitPsi: COMMAND_PRESSURE_MAX,
      fraction: Math.min(1, Math.max(0, value / FRAME_PRESSURE_MAX)),
    };
  });
  const muscles: MuscleView[] = MUSCLE_NAMES.map((muscle) => {
    const klass = frame?.classes?.[muscle];
    return {
      muscle,
      klass: klass && CLASS_NAMES.includes(klass) ? klass : "unknown",
      active: klass !== undefined && klass !== "rest",
    };
  });
  const fsmState = frame?.fsm_state ?? "unknown";
  return {
    connectionBadge: state.connection,
    roleBadge: state.role ?? "none",
    fsmState,
    alert: fsmState === "EmergencyVent" ? "emergency" : "none",
    staleBanner: isStale(state, nowMs),
    gauges,
    muscles,
    motion: frame?.motion ?? null,
    // Sliders live only for a control session in manual mode.
    controlsEnabled:
      state.role === "control" && state.manualMode && state.pending.length === 0,
    pendingCount: state.pending.length,
    errorToast: state.lastError,
    emg: state.emgWindow,
  };
}
