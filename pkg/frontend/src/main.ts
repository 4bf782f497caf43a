/**
 * Browser entry point: wires the session state, dashboard renderer, and a
 * transport (live WebSocket by default; ?fixture=1 replays the bundled
 * recording for an offline demo).
 */

import { issueCommand, type UiAction } from "./commands.js";
import { renderDashboard, type DashboardView } from "./dashboard.js";
import { PAM_NAMES, type Message, type PamName } from "./protocol.js";
import {
  initialState,
  onCommandSent,
  onConnecting,
  onDisconnected,
  onMessage,
  type UiSessionState,
} from "./state.js";
import { FixtureTransport, WsTransport, type Transport } from "./transport.js";

let state: UiSessionState = initialState();
let transport: Transport | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function dispatch(action: UiAction): void {
  const msg = issueCommand(state, action, Date.now());
  if (msg && msg.type === "command" && transport) {
    transport.send(msg);
    state = onCommandSent(state, msg.body.kind, Date.now());
    render();
  }
}

function render(): void {
  const view: DashboardView = renderDashboard(state, Date.now());
  el("connection").textContent = view.connectionBadge;
  el("role").textContent = view.roleBadge;
  const fsm = el("fsm-state");
  fsm.textContent = view.fsmState;
  fsm.className = view.alert === "emergency" ? "badge alert" : "badge";
  el("stale-banner").style.display = view.staleBanner ? "block" : "none";
  el("error-toast").textContent = view.errorToast ?? "";
  el("motion").textContent = view.motion ?? "-";

  for (const gauge of view.gauges) {
    const fill = el<HTMLDivElement>(`gauge-${gauge.pam}-fill`);
    fill.style.width = `${(gauge.fraction * 100).toFixed(1)}%`;
    el(`gauge-${gauge.pam}-value`).textContent = `${gauge.valuePsi.toFixed(1)} psi`;
  }
  for (const muscle of view.muscles) {
    const badge = el(`muscle-${muscle.muscle}`);
    badge.textContent = muscle.klass;
    badge.className = muscle.active ? "muscle active" : "muscle";
  }
  for (const pam of PAM_NAMES) {
    el<HTMLInputElement>(`slider-${pam}`).disabled = !view.controlsEnabled;
  }
  drawEmg(view);
}

function drawEmg(view: DashboardView): void {
  const canvas = el<HTMLCanvasElement>("emg-chart");
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const muscles = Object.keys(view.emg);
  const colors = ["#e15759", "#4e79a7", "#59a14f", "#f28e2b"];
  muscles.forEach((muscle, i) => {
    const points = view.emg[muscle];
    if (!points || points.length < 2) return;
    const t1 = points[points.length - 1][0];
    const t0 = t1 - 10_000;
    const lane = canvas.height / muscles.length;
    ctx.strokeStyle = colors[i % colors.length];
    ctx.beginPath();
    points.forEach(([t, v], j) => {
      const x = ((t - t0) / 10_000) * canvas.width;
      const y = lane * i + lane / 2 - v * lane * 0.4;
      if (j === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  });
}

function connect(): void {
  const params = new URLSearchParams(window.location.search);
  const events = {
    onMessage(msg: Message) {
      state = onMessage(state, msg, Date.now());
      render();
    },
    onClose() {
      state = onDisconnected(state);
      render();
    },
  };
  state = onConnecting(state);
  if (params.get("fixture")) {
    fetch("fixtures/telemetry.jsonl")
      .then((r) => r.text())
      .then((text) => {
        transport = new FixtureTransport(text.split("\n"), events);
      });
  } else {
    const host = params.get("host") ?? window.location.hostname ?? "127.0.0.1";
    const port = params.get("port") ?? "8766";
    const role = params.get("role") === "observe" ? "observe" : "control";
    transport = new WsTransport(`ws://${host}:${port}/`, role, events);
  }
}

function bindControls(): void {
  for (const pam of PAM_NAMES) {
    const slider = el<HTMLInputElement>(`slider-${pam}`);
    slider.addEventListener("change", () => {
      dispatch({
        kind: "slider_release",
        pam: pam as PamName,
        psi: Number(slider.value),
      });
    });
  }
  el("btn-vent").addEventListener("click", () => dispatch({ kind: "vent_click" }));
  el("btn-pause").addEventListener("click", () => dispatch({ kind: "pause_click" }));
  el("btn-resume").addEventListener("click", () =>
    dispatch({ kind: "resume_click" }),
  );
}

window.addEventListener("DOMContentLoaded", () => {
  bindControls();
  connect();
  setInterval(render, 500); // keep the stale banner honest
});
