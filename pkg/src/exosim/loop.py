"""Deterministic discrete-event simulation of the closed loop.

Virtual time only: EMG windows close on the analysis grid, classification
results return after a modeled cloud delay, the state machine reacts, valves
respond, and PAM pressure/mechanics advance on a fixed physics tick. Equal
(scenario, config, seed) triples yield identical timelines, event for event.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import dsp, pam, plant
from .fsm import (
    FsmState,
    MotionCommand,
    MotionController,
    MuscleClassVector,
    PAMS,
)
from .signals import (
    ActivationProfile,
    EmgTrace,
    MOTION_AGONIST,
    Muscle,
    MuscleClass,
    NoiseConfig,
    label_epochs,
    synth_trace,
)

SUPPLY_PSI = 80.0  # compressor line pressure; relief and targets cap below it

JOINT_FOR_PAM = {"elbow": "elbow", "shoulder": "shoulder", "shoulder_aux": "shoulder"}


@dataclass(frozen=True)
class LatencyConfig:
    """Per-hop delays (ms) of the transport fabric and actuation."""

    sensor_to_cloud_ms: float = 0.0
    cloud_inference_ms: tuple[float, float] = (200.0, 250.0)  # uniform range
    cloud_to_driver_ms: float = 0.0
    valve_response_ms: float = 50.0
    pam_actuation_ms: float = 100.0
    window_stride_ms: float = 250.0
    window_ms: float = 1000.0

    def __post_init__(self):
        lo, hi = self.cloud_inference_ms
        vals = [
            self.sensor_to_cloud_ms,
            lo,
            hi,
            self.cloud_to_driver_ms,
            self.valve_response_ms,
            self.pam_actuation_ms,
            self.window_stride_ms,
            self.window_ms,
        ]
        if any(v < 0 for v in vals):
            raise ValueError("latency components must be non-negative")
        if hi < lo:
            raise ValueError("cloud_inference_ms range inverted")


@dataclass
class TimelineEvent:
    t_ms: float
    seq: int
    kind: str
    payload: dict

    def as_dict(self) -> dict:
        return {"t_ms": self.t_ms, "seq": self.seq, "kind": self.kind,
                "payload": self.payload}


@dataclass
class Timeline:
    meta: dict
    events: list[TimelineEvent]
    ticks: dict[str, np.ndarray] = field(default_factory=dict)

    def of_kind(self, kind: str) -> list[TimelineEvent]:
        return [e for e in self.events if e.kind == kind]

    def to_jsonl(self, path: str | Path) -> Path:
        path = Path(path)
        with open(path, "w") as f:
            f.write(json.dumps({"meta": self.meta}, sort_keys=True) + "\n")
            for ev in self.events:
                f.write(json.dumps(ev.as_dict(), sort_keys=True) + "\n")
        return path

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "Timeline":
        lines = Path(path).read_text().splitlines()
        meta = json.loads(lines[0])["meta"]
        events = [TimelineEvent(**json.loads(line)) for line in lines[1:]]
        return cls(meta=meta, events=events)


@dataclass
class Scenario:
    """Muscle intent scripts plus optional joint kinematics and load."""

    name: str
    duration_ms: float
    profiles: dict[Muscle, ActivationProfile] = field(default_factory=dict)
    joint_scripts: dict[str, list[tuple[float, float]]] = field(default_factory=dict)
    load_kg: float = 0.0
    motion: str | None = None
    operator_commands: list[tuple[float, tuple]] = field(default_factory=list)
    baseline_sigma: float = 0.01
    powerline_amp: float = 0.05
    amp_mv: float = 1.0
    # Optional overrides a scenario file may carry; callers apply them.
    seed: int | None = None
    latency_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.duration_ms <= 0:
            raise ValueError("scenario duration must be positive")
        if self.load_kg < 0:
            raise ValueError("scenario load must be non-negative")
        for joint in self.joint_scripts:
            if joint not in plant.JOINTS:
                raise ValueError(f"unknown joint {joint!r} in scenario script")

    def joint_angle(self, joint: str, t_ms: float) -> float:
        script = self.joint_scripts.get(joint)
        if not script:
            return 0.0
        ts = [p[0] for p in script]
        angles = [p[1] for p in script]
        return float(np.interp(t_ms, ts, angles))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "duration_ms": self.duration_ms,
            "profiles": {
                m.value: {"events": [list(e) for e in p.events], "ramp_ms": p.ramp_ms}
                for m, p in self.profiles.items()
            },
            "joint_scripts": {
                j: [list(p) for p in pts] for j, pts in self.joint_scripts.items()
            },
            "load_kg": self.load_kg,
            "motion": self.motion,
            "operator_commands": [[t, list(c)] for t, c in self.operator_commands],
            "baseline_sigma": self.baseline_sigma,
            "powerline_amp": self.powerline_amp,
            "amp_mv": self.amp_mv,
            "seed": self.seed,
            "latency_overrides": dict(self.latency_overrides),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        try:
            profiles = {
                Muscle(m): ActivationProfile(
                    events=tuple(tuple(e) for e in p["events"]),
                    ramp_ms=p.get("ramp_ms", 100.0),
                )
                for m, p in d.get("profiles", {}).items()
            }
            return cls(
                name=d["name"],
                duration_ms=d["duration_ms"],
                profiles=profiles,
                joint_scripts={
                    j: [tuple(p) for p in pts]
                    for j, pts in d.get("joint_scripts", {}).items()
                },
                load_kg=d.get("load_kg", 0.0),
                motion=d.get("motion"),
                operator_commands=[
                    (t, tuple(c)) for t, c in d.get("operator_commands", [])
                ],
                baseline_sigma=d.get("baseline_sigma", 0.01),
                powerline_amp=d.get("powerline_amp", 0.05),
                amp_mv=d.get("amp_mv", 1.0),
                seed=d.get("seed"),
                latency_overrides=d.get("latency_overrides", {}),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed scenario: {exc}") from exc

    @classmethod
    def from_json(cls, path: str | Path) -> "Scenario":
        return cls.from_dict(json.loads(Path(path).read_text()))


class OracleClassifier:
    """Ground-truth window labels from the scenario's intent scripts."""

    def __init__(self, scenario: Scenario, latency: LatencyConfig, fs: float):
        self.labels: dict[Muscle, list[MuscleClass]] = {}
        for muscle in Muscle:
            profile = scenario.profiles.get(muscle, ActivationProfile())
            fake = EmgTrace(muscle, fs, np.zeros(int(scenario.duration_ms * fs / 1000)))
            self.labels[muscle] = label_epochs(
                fake, profile, latency.window_ms, latency.window_stride_ms
            )

    def classify(self, window_idx: int, epochs):
        classes = {
            m: (
                self.labels[m][window_idx]
                if window_idx < len(self.labels[m])
                else MuscleClass.REST
            )
            for m in Muscle
        }
        from .signals import CLASS_INDEX

        probs = {}
        for m, c in classes.items():
            one_hot = [0.0, 0.0, 0.0]
            one_hot[CLASS_INDEX[c]] = 1.0
            probs[m] = one_hot
        return classes, probs


class ModelClassifier:
    """Trained per-muscle networks applied to preprocessed windows."""

    def __init__(self, models: dict[Muscle, "ModelParams"]):
        from .net.model import predict  # local import keeps loop lightweight

        self._predict = predict
        self.models = models

    def classify(self, window_idx: int, epochs):
        from .signals import CLASS_ORDER

        classes, probs = {}, {}
        for muscle, values in epochs.items():
            p = self._predict(self.models[muscle], values)[0]
            classes[muscle] = CLASS_ORDER[int(np.argmax(p))]
            probs[muscle] = [float(v) for v in p]
        return classes, probs


class Simulation:
    """One closed-loop run over a scenario; see :func:`run_scenario`."""

    def __init__(
        self,
        scenario: Scenario,
        latency: LatencyConfig = LatencyConfig(),
        seed: int = 42,
        classifier=None,
        pam_cfg: pam.PamConfig = pam.PamConfig(),
        plant_cfg: plant.PlantConfig = plant.PlantConfig(),
        assist_enabled: bool = True,
        tick_ms: float = 10.0,
        telemetry_ms: float = 100.0,
        emg_sample_ms: float = 50.0,
    ):
        self.scenario = scenario
        self.latency = latency
        self.seed = seed
        self.pam_cfg = pam_cfg
        self.plant_cfg = plant_cfg
        self.assist_enabled = assist_enabled
        self.tick_ms = tick_ms
        self.telemetry_ms = telemetry_ms
        self.emg_sample_ms = emg_sample_ms
        self.fs = 500.0

        root = np.random.default_rng(seed)
        self.traces: dict[Muscle, EmgTrace] = {}
        for muscle in Muscle:
            profile = scenario.profiles.get(muscle, ActivationProfile())
            noise = NoiseConfig(
                baseline_sigma=scenario.baseline_sigma,
                powerline_amp=scenario.powerline_amp,
                seed=int(root.integers(0, 2**31 - 1)),
            )
            self.traces[muscle] = synth_trace(
                profile, muscle, scenario.duration_ms, self.fs, noise, scenario.amp_mv
            )
        self.inference_rng = np.random.default_rng(int(root.integers(0, 2**31 - 1)))
        self.preprocessed = {m: dsp.preprocess(t) for m, t in self.traces.items()}
        self.classifier = classifier or OracleClassifier(scenario, latency, self.fs)

        self.controller = MotionController()
        self.pams = {name: pam.PamState() for name in PAMS}
        # Applied (directive, target) per PAM; changes take valve_response_ms.
        self.applied: dict[str, tuple[str, float | None]] = {
            name: ("hold", None) for name in PAMS
        }
        self.settle_pending: dict[str, bool] = {name: False for name in PAMS}
        self.last_classes: dict[str, str] = {m.value: "rest" for m in Muscle}
        self.last_probs: dict[str, list] = {}
        self._prepared = False
        self.now_ms = 0.0

        self.events: list[TimelineEvent] = []
        self.heap: list = []
        self.seq = 0
        self.ticklog: dict[str, list] = {
            "t_ms": [],
            "fsm_state": [],
            **{f"pressure_{p}": [] for p in PAMS},
            **{f"force_{p}": [] for p in PAMS},
            **{
                f"{k}_{j}": []
                for j in plant.JOINTS
                for k in ("angle", "required_nm", "assist_nm", "effort")
            },
        }

    # -- event plumbing -----------------------------------------------------

    def _push(self, t_ms: float, kind: str, payload: dict) -> int:
        self.seq += 1
        heapq.heappush(self.heap, (t_ms, self.seq, kind, payload))
        return self.seq

    def _emit(self, t_ms: float, kind: str, payload: dict) -> int:
        self.seq += 1
        self.events.append(TimelineEvent(t_ms=t_ms, seq=self.seq, kind=kind,
                                         payload=payload))
        return self.seq

    # -- handlers -----------------------------------------------------------

    def _window_values(self, muscle: Muscle, end_ms: float) -> np.ndarray:
        trace = self.preprocessed[muscle]
        end_idx = int(round(end_ms * self.fs / 1000.0))
        start_idx = end_idx - int(round(self.latency.window_ms * self.fs / 1000.0))
        return dsp.scale(trace.samples[start_idx:end_idx])

    def _on_epoch_ready(self, t_ms: float, payload: dict):
        idx = payload["window_idx"]
        epoch_seq = self._emit(
            t_ms, "epoch_ready", {"window_idx": idx, "window_end_ms": t_ms}
        )
        epochs = {m: self._window_values(m, t_ms) for m in Muscle}
        classes, probs = self.classifier.classify(idx, epochs)
        lo, hi = self.latency.cloud_inference_ms
        inference = float(self.inference_rng.uniform(lo, hi))
        t_result = t_ms + self.latency.sensor_to_cloud_ms + inference
        self._push(
            t_result,
            "class_result",
            {
                "cause_seq": epoch_seq,
                "window_end_ms": t_ms,
                "inference_ms": inference,
                "classes": {m.value: c.value for m, c in classes.items()},
                "probs": {m.value: probs[m] for m in probs},
            },
        )

    def _on_class_result(self, t_ms: float, payload: dict):
        result_seq = self._emit(t_ms, "class_result", payload)
        self._push(
            t_ms + self.latency.cloud_to_driver_ms,
            "fsm_step",
            {**payload, "cause_seq": result_seq},
        )

    def _on_fsm_step(self, t_ms: float, payload: dict):
        self.last_classes = dict(payload["classes"])
        self.last_probs = dict(payload.get("probs", {}))
        if not self.assist_enabled:
            return
        vector = MuscleClassVector(
            **{m: MuscleClass(v) for m, v in payload["classes"].items()}, t_ms=t_ms
        )
        before = self.controller.state
        command = self.controller.on_classes(vector)
        after = self.controller.state
        cause = payload["cause_seq"]
        if after is not before:
            transition_seq = self._emit(
                t_ms,
                "fsm_transition",
                {
                    "cause_seq": cause,
                    "from": before.value,
                    "to": after.value,
                    "window_end_ms": payload["window_end_ms"],
                    "inference_ms": payload["inference_ms"],
                },
            )
            self._apply_command(t_ms, command, transition_seq, payload)

    def _apply_command(self, t_ms: float, command: MotionCommand, cause_seq: int,
                       chain: dict | None):
        valve_seq = self._emit(
            t_ms,
            "valve_cmd",
            {
                "cause_seq": cause_seq,
                "directives": {p: command.directive(p) for p in PAMS},
                "targets": {p: command.target_for(p) for p in PAMS},
                **(
                    {
                        "window_end_ms": chain["window_end_ms"],
                        "inference_ms": chain["inference_ms"],
                    }
                    if chain
                    else {}
                ),
            },
        )
        self._push(
            t_ms + self.latency.valve_response_ms,
            "valve_apply",
            {
                "cause_seq": valve_seq,
                "directives": {p: command.directive(p) for p in PAMS},
                "targets": {p: command.target_for(p) for p in PAMS},
            },
        )

    def _on_valve_apply(self, t_ms: float, payload: dict):
        for name in PAMS:
            directive = payload["directives"][name]
            target = payload["targets"][name]
            if (directive, target) != self.applied[name]:
                self.applied[name] = (directive, target)
                self.settle_pending[name] = True

    def _on_operator_cmd(self, t_ms: float, payload: dict):
        cmd = tuple(payload["cmd"])
        try:
            command = self.controller.on_manual(cmd)
        except ValueError as exc:
            self._emit(t_ms, "operator_rejected", {"cmd": list(cmd), "error": str(exc)})
            return
        seq = self._emit(
            t_ms,
            "fsm_transition",
            {"cause_seq": None, "from": "manual", "to": self.controller.state.value},
        )
        self._apply_command(t_ms, command, seq, None)

    def _servo_valve(self, name: str) -> tuple[str, float | None]:
        """Translate the applied (directive, target) into a valve action."""
        directive, target = self.applied[name]
        p = self.pams[name].pressure
        if directive == "hold":
            return "closed", None
        if target is None:
            return ("fill", None) if directive == "pump" else ("vent", None)
        if p < target - 0.25:
            return "fill", target
        if p > target + 0.25:
            return "vent", target
        return "closed", None

    def _on_tick(self, t_ms: float):
        scenario = self.scenario
        angles = {j: scenario.joint_angle(j, t_ms) for j in plant.JOINTS}
        for name in PAMS:
            valve, target = self._servo_valve(name)
            state = pam.update(
                self.pams[name], valve, SUPPLY_PSI, self.tick_ms, self.pam_cfg,
                target_psi=target,
            )
            joint = JOINT_FOR_PAM[name]
            if scenario.joint_scripts.get(joint):
                # Kinematic coupling: cable take-up follows the scripted angle.
                x = plant.pam_contraction_for_angle(
                    joint, angles[joint], self.plant_cfg, self.pam_cfg
                )
                force = pam.tension_at(state.delayed_pressure, x, self.pam_cfg)
                state.contraction = min(
                    x, pam.max_contraction(state.delayed_pressure, self.pam_cfg)
                )
                state.force = force
            self.pams[name] = state
            directive, tgt = self.applied[name]
            if self.settle_pending[name]:
                goal = tgt
                if goal is None:
                    goal = 0.0 if directive == "vent" else (
                        min(SUPPLY_PSI, pam.RELIEF_PSI) if directive == "pump" else
                        state.pressure
                    )
                if abs(state.pressure - goal) <= 0.5:
                    self.settle_pending[name] = False
                    self._emit(
                        t_ms, "pam_settled",
                        {"pam": name, "pressure_psi": state.pressure,
                         "directive": directive},
                    )

        log = self.ticklog
        log["t_ms"].append(t_ms)
        log["fsm_state"].append(self.controller.state.value)
        for name in PAMS:
            log[f"pressure_{name}"].append(self.pams[name].pressure)
            log[f"force_{name}"].append(self.pams[name].force)
        for joint in plant.JOINTS:
            js = plant.JointState(joint, angles[joint],
                                  external_load_kg=scenario.load_kg)
            required = plant.required_torque(js, self.plant_cfg)
            pam_name = "elbow" if joint == "elbow" else "shoulder"
            assist = plant.assist_torque(
                self.pams[pam_name].force, joint, self.plant_cfg
            )
            effort = plant.muscle_effort(required, assist, joint, self.plant_cfg)
            log[f"angle_{joint}"].append(angles[joint])
            log[f"required_nm_{joint}"].append(required)
            log[f"assist_nm_{joint}"].append(assist)
            log[f"effort_{joint}"].append(effort)

    def _on_telemetry(self, t_ms: float):
        idx = int(round(t_ms * self.fs / 1000.0))
        emg = {
            m.value: float(self.traces[m].samples[min(idx, len(self.traces[m].samples) - 1)])
            for m in Muscle
        }
        self._emit(
            t_ms,
            "telemetry",
            {
                "pressures_psi": {p: self.pams[p].pressure for p in PAMS},
                "fsm_state": self.controller.state.value,
                "classes": dict(self.last_classes),
                "probs": dict(self.last_probs),
                "emg_mv": emg,
                "motion": self.scenario.motion,
            },
        )

    # -- main loop ----------------------------------------------------------

    def prepare(self):
        """Schedule the periodic event grids; call once before stepping."""
        if self._prepared:
            return
        self._prepared = True
        duration = self.scenario.duration_ms
        end = self.latency.window_ms
        idx = 0
        while end <= duration:
            self._push(end, "epoch_ready", {"window_idx": idx})
            idx += 1
            end += self.latency.window_stride_ms
        t = self.tick_ms
        while t <= duration:
            self._push(t, "pam_tick", {})
            t += self.tick_ms
        t = 0.0
        while t <= duration:
            self._push(t, "telemetry_tick", {})
            t += self.telemetry_ms
        t = 0.0
        while t <= duration:
            self._push(t, "emg_tick", {})
            t += self.emg_sample_ms
        for t_cmd, cmd in self.scenario.operator_commands:
            self._push(t_cmd, "operator_cmd", {"cmd": list(cmd)})

    def inject_operator(self, cmd: tuple, t_ms: float | None = None):
        """Queue an operator command at virtual time (defaults to now)."""
        self._push(self.now_ms if t_ms is None else t_ms, "operator_cmd",
                   {"cmd": list(cmd)})

    def step_until(self, t_target_ms: float):
        """Process all events with t <= t_target_ms (bounded by the scenario)."""
        self.prepare()
        duration = self.scenario.duration_ms
        limit = min(t_target_ms, duration)
        while self.heap and self.heap[0][0] <= limit:
            t_ms, _, kind, payload = heapq.heappop(self.heap)
            self.now_ms = t_ms
            if kind == "epoch_ready":
                self._on_epoch_ready(t_ms, payload)
            elif kind == "class_result":
                self._on_class_result(t_ms, payload)
            elif kind == "fsm_step":
                self._on_fsm_step(t_ms, payload)
            elif kind == "valve_apply":
                self._on_valve_apply(t_ms, payload)
            elif kind == "operator_cmd":
                self._on_operator_cmd(t_ms, payload)
            elif kind == "pam_tick":
                self._on_tick(t_ms)
            elif kind == "telemetry_tick":
                self._on_telemetry(t_ms)
            elif kind == "emg_tick":
                sample_idx = int(round(t_ms * self.fs / 1000.0))
                for m in Muscle:
                    samples = self.traces[m].samples
                    self._emit(
                        t_ms,
                        "emg_sample",
                        {
                            "muscle": m.value,
                            "mv": float(samples[min(sample_idx, len(samples) - 1)]),
                        },
                    )
        self.now_ms = limit

    def run(self) -> Timeline:
        self.step_until(self.scenario.duration_ms)
        return self.finalize()

    def finalize(self) -> Timeline:
        meta = {
            "scenario": self.scenario.to_dict(),
            "seed": self.seed,
            "latency": asdict(self.latency),
            "assist_enabled": self.assist_enabled,
            "classifier": type(self.classifier).__name__,
            "true_onsets": {
                m.value: [ev[0] for ev in
                          self.scenario.profiles.get(m, ActivationProfile()).events]
                for m in Muscle
            },
        }
        ticks = {k: np.array(v) for k, v in self.ticklog.items()}
        return Timeline(meta=meta, events=self.events, ticks=ticks)


def run_scenario(
    scenario: Scenario,
    latency: LatencyConfig = LatencyConfig(),
    seed: int = 42,
    **kwargs,
) -> Timeline:
    """Execute synth -> DSP -> classify -> FSM -> PAM -> plant over a scenario."""
    return Simulation(scenario, latency, seed, **kwargs).run()


# ---------------------------------------------------------------------------
# Latency measurement
# ---------------------------------------------------------------------------


def measure_latency(
    timeline: Timeline,
    muscle: Muscle = Muscle.BICEPS,
    pam_name: str = "elbow",
    directive: str = "pump",
) -> dict:
    """Intention-to-assistance latency per matched onset.

    latency = t(first attributable valve command) + pam_actuation - t(onset).
    A valve command is attributable to an onset when its causal window spans
    the onset and it drives the expected PAM. Returns per-onset entries with
    an exact component decomposition, plus min/mean/max stats.
    """
    latency_cfg = timeline.meta["latency"]
    onsets = timeline.meta["true_onsets"][muscle.value]
    valve_events = [
        e
        for e in timeline.of_kind("valve_cmd")
        if e.payload.get("directives", {}).get(pam_name) == directive
        and "window_end_ms" in e.payload
    ]
    entries = []
    for onset in onsets:
        match = None
        for ev in valve_events:
            end = ev.payload["window_end_ms"]
            if end >= onset and end - onset <= latency_cfg["window_ms"]:
                match = ev
                break
        if match is None:
            continue
        alignment = match.payload["window_end_ms"] - onset
        components = {
            "window_alignment_ms": alignment,
            "sensor_to_cloud_ms": latency_cfg["sensor_to_cloud_ms"],
            "cloud_inference_ms": match.payload["inference_ms"],
            "cloud_to_driver_ms": latency_cfg["cloud_to_driver_ms"],
            "pam_actuation_ms": latency_cfg["pam_actuation_ms"],
        }
        measured = match.t_ms + latency_cfg["pam_actuation_ms"] - onset
        entries.append(
            {
                "onset_ms": onset,
                "valve_cmd_ms": match.t_ms,
                "latency_ms": measured,
                "components": components,
                "component_sum_ms": sum(components.values()),
            }
        )
        valve_events.remove(match)
    if not entries:
        raise ValueError("no onset/valve-command pairs matched")
    vals = [e["latency_ms"] for e in entries]
    reference_band = (500.0, 550.0)
    spec_band = (500.0, 600.0)
    mean = float(np.mean(vals))
    return {
        "entries": entries,
        "min_ms": float(np.min(vals)),
        "mean_ms": mean,
        "max_ms": float(np.max(vals)),
        "spec_band_ms": list(spec_band),
        "spec_band_ok": bool(spec_band[0] <= mean <= spec_band[1]),
        "reference_band_ms": list(reference_band),
        # The reference's stated end-to-end band is tighter than the sum of
        # its own components; a miss is a warning, not a failure.
        "reference_band_flag": (
            "pass" if reference_band[0] <= mean <= reference_band[1] else "warn"
        ),
        # Second published figure for the sequential processing stages alone;
        # surfaced for context, never asserted.
        "sequential_reference_ms": 350.0,
    }


# ---------------------------------------------------------------------------
# Built-in scenarios
# ---------------------------------------------------------------------------


def _burst(start: float, length: float, intensity: float = 0.9) -> ActivationProfile:
    return ActivationProfile(events=((start, start + length, intensity),))


def motion_scenario(motion: str, duration_ms: float = 7000.0) -> Scenario:
    """Single-motion demo: agonist burst, then the antagonist pause/vent pair."""
    agonist = MOTION_AGONIST[motion]
    profiles = {agonist: _burst(1050.0, 1500.0)}
    if motion == "elbow_flexion":
        profiles[Muscle.TRICEPS] = _burst(3050.0, 1750.0)
    elif motion == "shoulder_flexion":
        profiles[Muscle.LATISSIMUS_DORSI] = _burst(3050.0, 1750.0)
    joint = "elbow" if motion.startswith("elbow") else "shoulder"
    scripts = {joint: [(0.0, 0.0), (1500.0, 0.0), (3000.0, 90.0), (4500.0, 90.0),
                       (6000.0, 0.0)]}
    return Scenario(
        name=f"motion_{motion}",
        duration_ms=duration_ms,
        profiles=profiles,
        joint_scripts=scripts,
        motion=motion,
    )


def latency_probe_scenario(reps: int = 5, period_ms: float = 5000.0) -> Scenario:
    """Repeated elbow flexions with onsets at grid+50 ms for latency stats."""
    biceps = []
    triceps = []
    for k in range(reps):
        t0 = k * period_ms
        biceps.append((t0 + 1050.0, t0 + 2550.0, 0.9))
        triceps.append((t0 + 3050.0, t0 + 4800.0, 0.9))
    return Scenario(
        name="latency_probe",
        duration_ms=reps * period_ms,
        profiles={
            Muscle.BICEPS: ActivationProfile(events=tuple(biceps)),
            Muscle.TRICEPS: ActivationProfile(events=tuple(triceps)),
        },
        motion="elbow_flexion",
    )


BUILTIN_SCENARIOS = {
    "motion1": lambda: motion_scenario("elbow_flexion"),
    "motion2": lambda: motion_scenario("elbow_extension"),
    "motion3": lambda: motion_scenario("shoulder_flexion"),
    "motion4": lambda: motion_scenario("shoulder_extension"),
    "latency_probe": latency_probe_scenario,
    "idle": lambda: Scenario(name="idle", duration_ms=10000.0),
}

MOTION_EXPECTATIONS = {
    "motion1": (FsmState.ELBOW_FLEX_ASSIST, "elbow"),
    "motion2": (FsmState.ELBOW_EXT_ASSIST, "elbow"),
    "motion3": (FsmState.SHOULDER_FLEX_ASSIST, "shoulder"),
    "motion4": (FsmState.SHOULDER_EXT_ASSIST, "shoulder"),
}


def replay_motions_1_to_4(
    latency: LatencyConfig = LatencyConfig(),
    seed: int = 42,
    models: dict | None = None,
) -> dict:
    """Script the four demos; assert the expected state entry per motion.

    With ``models`` the trained classifier drives the loop (checkpoint
    required); otherwise ground-truth labels do.
    """
    results = {}
    for name in ("motion1", "motion2", "motion3", "motion4"):
        scenario = BUILTIN_SCENARIOS[name]()
        classifier = ModelClassifier(models) if models else None
        timeline = run_scenario(scenario, latency, seed, classifier=classifier)
        expected_state, expected_pam = MOTION_EXPECTATIONS[name]
        transitions = [e.payload["to"] for e in timeline.of_kind("fsm_transition")]
        entered = expected_state.value in transitions
        pumped = False
        if name in ("motion1", "motion3"):
            pumped = bool(
                np.max(timeline.ticks[f"pressure_{expected_pam}"]) > 20.0
            )
        else:
            # Extension assist vents the flexor PAM; expect a vent directive.
            pumped = any(
                e.payload["directives"][expected_pam] == "vent"
                for e in timeline.of_kind("valve_cmd")
            )
        results[name] = {
            "motion": scenario.motion,
            "expected_state": expected_state.value,
            "entered": entered,
            "actuated": pumped,
            "passed": bool(entered and pumped),
            "transitions": transitions,
        }
    results["all_passed"] = all(results[m]["passed"] for m in MOTION_EXPECTATIONS)
    return results
