/** Dashboard rendering against the recorded telemetry fixture. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { renderDashboard } from "../src/dashboard.js";
import { decode, hello, type Message, type TelemetryBody } from "../src/protocol.js";
import { initialState, onMessage, type UiSessionState } from "../src/state.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixturePath = join(here, "..", "fixtures", "telemetry.jsonl");

function loadFixture(): Message[] {
  return readFileSync(fixturePath, "utf8")
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line.length > 0)
    .map((line) => decode(line));
}

function playback(frames: Message[], startMs = 1000): UiSessionState {
  let state = onMessage(initialState(), hello("control"), startMs);
  let now = startMs;
  for (const frame of frames) {
    now += 100;
    state = onMessage(state, frame, now);
  }
  return state;
}

describe("fixture playback", () => {
  const frames = loadFixture();

  it("fixture is non-trivial and protocol-valid", () => {
    expect(frames.length).toBeGreaterThan(50);
    expect(frames.every((f) => f.type === "telemetry")).toBe(true);
  });

  it("gauges render the fixture pressures exactly", () => {
    for (const count of [10, 31, frames.length]) {
      const state = playback(frames.slice(0, count));
      const view = renderDashboard(state, 1000 + count * 100);
      const last = frames[count - 1].body as TelemetryBody;
      for (const gauge of view.gauges) {
        expect(gauge.valuePsi).toBe(last.pressures_psi[gauge.pam]);
        expect(gauge.maxPsi).toBe(70);
        expect(gauge.autoLimitPsi).toBe(60);
      }
      expect(view.fsmState).toBe(last.fsm_state);
    }
  });

  it("muscle badges render the fixture classes exactly", () => {
    const state = playback(frames);
    const view = renderDashboard(state, 1000 + frames.length * 100);
    const last = frames[frames.length - 1].body as TelemetryBody;
    for (const muscle of view.muscles) {
      const expected = last.classes?.[muscle.muscle] ?? "unknown";
      expect(muscle.klass).toBe(expected);
    }
  });

  it("assist phase appears in the fixture and the gauge follows it", () => {
    const pumped = frames.find(
      (f) => (f.body as TelemetryBody).pressures_psi.elbow > 50,
    );
    expect(pumped).toBeDefined();
  });

  it("stale banner appears after a >1 s frame gap", () => {
    const state = playback(frames.slice(0, 5));
    const lastArrival = 1000 + 5 * 100;
    expect(renderDashboard(state, lastArrival + 500).staleBanner).toBe(false);
    expect(renderDashboard(state, lastArrival + 1500).staleBanner).toBe(true);
  });

  it("EmergencyVent renders the prominent alert state", () => {
    const base = frames[0].body as TelemetryBody;
    const vent: Message = {
      v: 1,
      type: "telemetry",
      body: { ...base, fsm_state: "EmergencyVent" },
    };
    const state = onMessage(playback(frames.slice(0, 3)), vent, 99_999);
    const view = renderDashboard(state, 99_999);
    expect(view.alert).toBe("emergency");
    // Manual mode engaged + control role: sliders come alive.
    expect(view.controlsEnabled).toBe(true);
  });

  it("sliders stay disabled outside manual mode", () => {
    const state = playback(frames.slice(0, 10)); // automatic assist phase
    const view = renderDashboard(state, 2000);
    expect(view.controlsEnabled).toBe(false);
  });

  it("rendering is a pure function of the state", () => {
    const state = playback(frames);
    const a = renderDashboard(state, 5000);
    const b = renderDashboard(state, 5000);
    expect(a).toEqual(b);
  });
});
