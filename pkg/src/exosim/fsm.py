"""Motion state machine: per-muscle class streams to exoskeleton states and
per-PAM valve commands.

Flexion assists trigger on the agonist's onset class; the antagonist pauses
and then vents the motion on successive activations (a single antagonist
activation never vents directly). Extension assists are realized as
controlled venting of the joint's flexor PAM. Manual operator commands take
precedence over classifier-driven transitions until released.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .pam import AUTO_LIMIT_PSI
from .signals import Muscle, MuscleClass


class FsmState(str, Enum):
    REST = "Rest"
    ELBOW_FLEX_ASSIST = "ElbowFlexAssist"
    ELBOW_PAUSED = "ElbowPaused"
    ELBOW_VENTING = "ElbowVenting"
    ELBOW_EXT_ASSIST = "ElbowExtAssist"
    SHOULDER_FLEX_ASSIST = "ShoulderFlexAssist"
    SHOULDER_PAUSED = "ShoulderPaused"
    SHOULDER_VENTING = "ShoulderVenting"
    SHOULDER_EXT_ASSIST = "ShoulderExtAssist"
    COMBINED_ELBOW_PAUSED_SHOULDER_FLEX = "CombinedElbowPausedShoulderFlex"
    COMBINED_SHOULDER_PAUSED_ELBOW_FLEX = "CombinedShoulderPausedElbowFlex"
    MANUAL_OVERRIDE = "ManualOverride"
    EMERGENCY_VENT = "EmergencyVent"


PAMS = ("elbow", "shoulder", "shoulder_aux")
DIRECTIVES = ("pump", "hold", "vent")


@dataclass(frozen=True)
class MuscleClassVector:
    """One classifier result per muscle at a common timestamp."""

    biceps: MuscleClass = MuscleClass.REST
    triceps: MuscleClass = MuscleClass.REST
    medial_deltoid: MuscleClass = MuscleClass.REST
    latissimus_dorsi: MuscleClass = MuscleClass.REST
    t_ms: float = 0.0

    @classmethod
    def from_dict(cls, classes: dict[Muscle, MuscleClass], t_ms: float = 0.0):
        return cls(
            biceps=classes.get(Muscle.BICEPS, MuscleClass.REST),
            triceps=classes.get(Muscle.TRICEPS, MuscleClass.REST),
            medial_deltoid=classes.get(Muscle.MEDIAL_DELTOID, MuscleClass.REST),
            latissimus_dorsi=classes.get(Muscle.LATISSIMUS_DORSI, MuscleClass.REST),
            t_ms=t_ms,
        )

    @property
    def triggers(self) -> tuple[bool, bool, bool, bool]:
        """(biceps onset, triceps activation, deltoid onset, latissimus activation)."""
        return (
            self.biceps is MuscleClass.ONSET,
            self.triceps is MuscleClass.ACTIVATION,
            self.medial_deltoid is MuscleClass.ONSET,
            self.latissimus_dorsi is MuscleClass.ACTIVATION,
        )

    @property
    def all_rest(self) -> bool:
        return all(
            c is MuscleClass.REST
            for c in (
                self.biceps,
                self.triceps,
                self.medial_deltoid,
                self.latissimus_dorsi,
            )
        )


@dataclass(frozen=True)
class MotionCommand:
    """Per-PAM valve directive, with optional pressure targets (psi)."""

    elbow: str = "hold"
    shoulder: str = "hold"
    shoulder_aux: str = "hold"
    targets: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        for d in (self.elbow, self.shoulder, self.shoulder_aux):
            if d not in DIRECTIVES:
                raise ValueError(f"unknown directive {d!r}")
        for pam, psi in self.targets:
            if pam not in PAMS:
                raise ValueError(f"unknown PAM {pam!r}")
            if not 0.0 <= psi <= AUTO_LIMIT_PSI:
                raise ValueError(
                    f"target {psi} psi outside [0, {AUTO_LIMIT_PSI}] envelope"
                )

    def directive(self, pam: str) -> str:
        return getattr(self, pam)

    def target_for(self, pam: str) -> float | None:
        for name, psi in self.targets:
            if name == pam:
                return psi
        return None


HOLD_ALL = MotionCommand()
VENT_ALL = MotionCommand(elbow="vent", shoulder="vent", shoulder_aux="vent")
PUMP_ELBOW = MotionCommand(elbow="pump", targets=(("elbow", AUTO_LIMIT_PSI),))
PUMP_SHOULDER = MotionCommand(shoulder="pump", targets=(("shoulder", AUTO_LIMIT_PSI),))
VENT_ELBOW = MotionCommand(elbow="vent")
VENT_SHOULDER = MotionCommand(shoulder="vent")

# Standing command per state (Moore machine: output depends on state only).
STATE_COMMANDS: dict[FsmState, MotionCommand] = {
    FsmState.REST: HOLD_ALL,
    FsmState.ELBOW_FLEX_ASSIST: PUMP_ELBOW,
    FsmState.ELBOW_PAUSED: HOLD_ALL,
    FsmState.ELBOW_VENTING: VENT_ALL,
    FsmState.ELBOW_EXT_ASSIST: VENT_ELBOW,
    FsmState.SHOULDER_FLEX_ASSIST: PUMP_SHOULDER,
    FsmState.SHOULDER_PAUSED: HOLD_ALL,
    FsmState.SHOULDER_VENTING: VENT_ALL,
    FsmState.SHOULDER_EXT_ASSIST: VENT_SHOULDER,
    FsmState.COMBINED_ELBOW_PAUSED_SHOULDER_FLEX: PUMP_SHOULDER,
    FsmState.COMBINED_SHOULDER_PAUSED_ELBOW_FLEX: PUMP_ELBOW,
    FsmState.MANUAL_OVERRIDE: HOLD_ALL,
    FsmState.EMERGENCY_VENT: VENT_ALL,
}

# Input equivalence classes over the four trigger predicates. "none" means no
# trigger fired (covers all-rest and non-triggering class mixes); "multi"
# covers simultaneous triggers, which automatic states treat as ambiguous.
INPUT_CLASSES = ("none", "b_onset", "t_act", "d_onset", "l_act", "multi")
MANUAL_INPUTS = ("pause_all", "vent_all", "set_pressure", "resume_auto")


def input_class(classes: MuscleClassVector) -> str:
    triggers = classes.triggers
    fired = [
        name
        for name, hit in zip(("b_onset", "t_act", "d_onset", "l_act"), triggers)
        if hit
    ]
    if not fired:
        return "none"
    if len(fired) > 1:
        return "multi"
    return fired[0]


def _next_state(state: FsmState, inp: str) -> FsmState:
    s, rest = FsmState, inp == "none"
    if state is s.REST:
        return {
            "b_onset": s.ELBOW_FLEX_ASSIST,
            "t_act": s.ELBOW_EXT_ASSIST,
            "d_onset": s.SHOULDER_FLEX_ASSIST,
            "l_act": s.SHOULDER_EXT_ASSIST,
        }.get(inp, s.REST)
    if state is s.ELBOW_FLEX_ASSIST:
        # No triceps intervention: keep pumping toward full range.
        return s.ELBOW_PAUSED if inp == "t_act" else state
    if state is s.ELBOW_PAUSED:
        if inp == "t_act":
            return s.ELBOW_VENTING
        if inp == "d_onset":
            return s.COMBINED_ELBOW_PAUSED_SHOULDER_FLEX
        return state
    if state is s.ELBOW_VENTING:
        return s.REST if rest else state
    if state is s.ELBOW_EXT_ASSIST:
        return s.REST if rest else state
    if state is s.SHOULDER_FLEX_ASSIST:
        return s.SHOULDER_PAUSED if inp == "l_act" else state
    if state is s.SHOULDER_PAUSED:
        if inp == "l_act":
            return s.SHOULDER_VENTING
        if inp == "b_onset":
            return s.COMBINED_SHOULDER_PAUSED_ELBOW_FLEX
        return state
    if state is s.SHOULDER_VENTING:
        return s.REST if rest else state
    if state is s.SHOULDER_EXT_ASSIST:
        return s.REST if rest else state
    if state is s.COMBINED_ELBOW_PAUSED_SHOULDER_FLEX:
        # Antagonist of the active joint pauses everything; the held elbow
        # pressure stays held (commands stay safe even as the label narrows).
        return s.SHOULDER_PAUSED if inp == "l_act" else state
    if state is s.COMBINED_SHOULDER_PAUSED_ELBOW_FLEX:
        return s.ELBOW_PAUSED if inp == "t_act" else state
    if state is s.MANUAL_OVERRIDE:
        return state  # classifier inputs never move manual states
    if state is s.EMERGENCY_VENT:
        return s.REST if rest else state
    raise ValueError(f"unhandled state {state}")


def step(state: FsmState, classes: MuscleClassVector) -> tuple[FsmState, MotionCommand]:
    """Advance one classification tick; pure in (state, input)."""
    nxt = _next_state(state, input_class(classes))
    return nxt, STATE_COMMANDS[nxt]


def manual_override(state: FsmState, cmd) -> tuple[FsmState, MotionCommand]:
    """Apply an operator command; wins over classifier-driven transitions.

    ``cmd`` is ``("pause_all",)``, ``("vent_all",)``, ``("resume_auto",)`` or
    ``("set_pressure", pam, psi)``. Out-of-range pressures are rejected with
    the state unchanged.
    """
    kind = cmd[0]
    if kind == "pause_all":
        return FsmState.MANUAL_OVERRIDE, HOLD_ALL
    if kind == "vent_all":
        return FsmState.EMERGENCY_VENT, VENT_ALL
    if kind == "resume_auto":
        return FsmState.REST, HOLD_ALL
    if kind == "set_pressure":
        _, pam, psi = cmd
        if pam not in PAMS:
            raise ValueError(f"unknown PAM {pam!r}")
        if not 0.0 <= psi <= AUTO_LIMIT_PSI:
            raise ValueError(
                f"pressure {psi} psi outside [0, {AUTO_LIMIT_PSI}]; state unchanged"
            )
        directives = {p: "hold" for p in PAMS}
        directives[pam] = "pump"
        return (
            FsmState.MANUAL_OVERRIDE,
            MotionCommand(**directives, targets=((pam, float(psi)),)),
        )
    raise ValueError(f"unknown manual command {kind!r}")


def transition_table() -> list[dict]:
    """Exhaustive (state x input class) table, including manual inputs.

    Every state has a defined outcome for every input equivalence class and
    every manual command, so the table is total by construction.
    """
    rows = []
    for state in FsmState:
        for inp in INPUT_CLASSES:
            nxt = _next_state(state, inp)
            cmd = STATE_COMMANDS[nxt]
            rows.append(
                {
                    "state": state.value,
                    "input_class": inp,
                    "next_state": nxt.value,
                    "pam_cmds": "/".join(cmd.directive(p) for p in PAMS),
                }
            )
        for inp in MANUAL_INPUTS:
            manual_cmd = {
                "pause_all": ("pause_all",),
                "vent_all": ("vent_all",),
                "resume_auto": ("resume_auto",),
                "set_pressure": ("set_pressure", "elbow", AUTO_LIMIT_PSI),
            }[inp]
            nxt, cmd = manual_override(state, manual_cmd)
            rows.append(
                {
                    "state": state.value,
                    "input_class": inp,
                    "next_state": nxt.value,
                    "pam_cmds": "/".join(cmd.directive(p) for p in PAMS),
                }
            )
    return rows


def export_table_csv(path: str | Path) -> Path:
    path = Path(path)
    rows = transition_table()
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(
            f, fieldnames=["state", "input_class", "next_state", "pam_cmds"]
        )
        writer.writeheader()
        writer.writerows(rows)
    return path


@dataclass
class MotionController:
    """Stateful wrapper arbitrating classifier inputs against manual latches."""

    state: FsmState = FsmState.REST
    manual: bool = False
    last_command: MotionCommand = field(default_factory=lambda: HOLD_ALL)

    def on_classes(self, classes: MuscleClassVector) -> MotionCommand:
        if self.manual:
            return self.last_command  # manual wins until released
        self.state, self.last_command = step(self.state, classes)
        return self.last_command

    def on_manual(self, cmd) -> MotionCommand:
        self.state, self.last_command = manual_override(self.state, cmd)
        self.manual = cmd[0] != "resume_auto"
        return self.last_command
