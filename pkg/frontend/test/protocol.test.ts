/** Round-trip and validation behavior of the v1 protocol implementation. */

import { describe, expect, it } from "vitest";

import {
  clampCommandPsi,
  command,
  decode,
  encode,
  hello,
  PAM_NAMES,
  ProtocolError,
  validateMessage,
  type Message,
} from "../src/protocol.js";

/** Deterministic PRNG so the 1000-message sweep is reproducible. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function randomMessage(rand: () => number): Message {
  const pick = <T>(items: readonly T[]): T =>
    items[Math.floor(rand() * items.length)];
  switch (Math.floor(rand() * 4)) {
    case 0:
      return hello(pick(["control", "observe"] as const));
    case 1: {
      const kind = pick([
        "set_pressure",
        "pause_all",
        "vent_all",
        "resume_auto",
        "start_scenario",
      ] as const);
      if (kind === "set_pressure") {
        return command({
          kind,
          pam: pick(PAM_NAMES),
          psi: Math.round(rand() * 600) / 10,
          issued_t_ms: Math.round(rand() * 1e6),
        });
      }
      if (kind === "start_scenario") {
        return command({ kind, name: `scenario_${Math.floor(rand() * 100)}` });
      }
      return command({ kind, issued_t_ms: Math.round(rand() * 1e6) });
    }
    case 2:
      return {
        v: 1,
        type: "telemetry",
        body: {
          t_ms: Math.round(rand() * 1e6) / 10,
          pressures_psi: {
            elbow: Math.round(rand() * 700) / 10,
            shoulder: Math.round(rand() * 700) / 10,
            shoulder_aux: Math.round(rand() * 700) / 10,
          },
          fsm_state: pick(["Rest", "ElbowFlexAssist", "EmergencyVent"]),
          classes: {
            biceps: pick(["rest", "onset", "activation"] as const),
            triceps: pick(["rest", "onset", "activation"] as const),
          },
          // ||0 normalizes -0, which JSON cannot represent
          emg_mv: { biceps: [Math.round((rand() - 0.5) * 2000) / 1000 || 0] },
          motion: rand() > 0.5 ? "elbow_flexion" : null,
        },
      };
    default:
      return {
        v: 1,
        type: "error",
        body: { message: `error ${Math.floor(rand() * 1000)}`, code: "test" },
      };
  }
}

describe("protocol round-trip", () => {
  it("decode(encode(m)) = m for 1000 randomized messages", () => {
    const rand = mulberry32(42);
    for (let i = 0; i < 1000; i++) {
      const msg = randomMessage(rand);
      expect(decode(encode(msg))).toEqual(msg);
    }
  });
});

describe("protocol validation", () => {
  it("rejects a missing version tag", () => {
    expect(() =>
      decode(JSON.stringify({ type: "hello", body: { role: "observe" } })),
    ).toThrow(ProtocolError);
  });

  it("rejects a wrong version", () => {
    expect(() =>
      decode(JSON.stringify({ v: 2, type: "hello", body: { role: "observe" } })),
    ).toThrow(/version/);
  });

  it("rejects unknown fields", () => {
    expect(() =>
      decode(
        JSON.stringify({
          v: 1,
          type: "command",
          body: { kind: "vent_all", extra: true },
        }),
      ),
    ).toThrow(/unknown field/);
  });

  it("refuses frames violating the pressure invariant", () => {
    const frame = {
      v: 1,
      type: "telemetry",
      body: {
        t_ms: 0,
        pressures_psi: { elbow: 71, shoulder: 0, shoulder_aux: 0 },
        fsm_state: "Rest",
      },
    };
    expect(() => validateMessage(frame)).toThrow(/above 70/);
  });

  it("refuses commands above the 60 psi envelope", () => {
    expect(() =>
      validateMessage(command({ kind: "set_pressure", pam: "elbow", psi: 61 })),
    ).toThrow(/above 60/);
  });

  it("clamps requested pressures into the envelope", () => {
    expect(clampCommandPsi(65)).toBe(60);
    expect(clampCommandPsi(-3)).toBe(0);
    expect(clampCommandPsi(42.5)).toBe(42.5);
  });
});
