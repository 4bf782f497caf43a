"""Motion state machine: scripted transitions, table totality, safety."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exosim.fsm import (
    AUTO_LIMIT_PSI,
    FsmState,
    INPUT_CLASSES,
    MANUAL_INPUTS,
    MotionCommand,
    MotionController,
    MuscleClassVector,
    PAMS,
    input_class,
    manual_override,
    step,
    transition_table,
)
from exosim.signals import MuscleClass


def vec(**kwargs) -> MuscleClassVector:
    return MuscleClassVector(
        **{k: MuscleClass(v) for k, v in kwargs.items()}
    )


S = FsmState


class TestScriptedTransitions:
    """The eleven transitions named in the control logic, exactly."""

    def test_01_rest_biceps_onset_pumps_elbow(self):
        state, cmd = step(S.REST, vec(biceps="onset"))
        assert state is S.ELBOW_FLEX_ASSIST
        assert cmd.elbow == "pump"
        assert cmd.target_for("elbow") == AUTO_LIMIT_PSI

    def test_02_flex_plus_triceps_activation_pauses(self):
        state, cmd = step(S.ELBOW_FLEX_ASSIST, vec(triceps="activation"))
        assert state is S.ELBOW_PAUSED
        assert cmd.elbow == "hold"

    def test_03_paused_plus_triceps_activation_vents(self):
        state, cmd = step(S.ELBOW_PAUSED, vec(triceps="activation"))
        assert state is S.ELBOW_VENTING
        assert cmd.elbow == "vent"

    def test_04_venting_returns_to_rest(self):
        state, cmd = step(S.ELBOW_VENTING, vec())
        assert state is S.REST
        assert cmd == MotionCommand()  # hold all at rest

    def test_05_flex_without_triceps_remains_pumping(self):
        for classes in (vec(), vec(biceps="activation"), vec(biceps="onset"),
                        vec(triceps="onset")):
            state, cmd = step(S.ELBOW_FLEX_ASSIST, classes)
            assert state is S.ELBOW_FLEX_ASSIST
            assert cmd.elbow == "pump"

    def test_06_rest_triceps_activation_extends(self):
        state, cmd = step(S.REST, vec(triceps="activation"))
        assert state is S.ELBOW_EXT_ASSIST
        assert cmd.elbow == "vent"  # extension realized as controlled venting

    def test_07_rest_deltoid_onset_shoulder_flex(self):
        state, cmd = step(S.REST, vec(medial_deltoid="onset"))
        assert state is S.SHOULDER_FLEX_ASSIST
        assert cmd.shoulder == "pump"

    def test_08_shoulder_flex_latissimus_pauses(self):
        state, cmd = step(S.SHOULDER_FLEX_ASSIST, vec(latissimus_dorsi="activation"))
        assert state is S.SHOULDER_PAUSED
        assert cmd.shoulder == "hold"

    def test_09_shoulder_paused_latissimus_vents_then_rest(self):
        state, cmd = step(S.SHOULDER_PAUSED, vec(latissimus_dorsi="activation"))
        assert state is S.SHOULDER_VENTING
        assert cmd.shoulder == "vent"
        state, _ = step(state, vec())
        assert state is S.REST

    def test_10_rest_latissimus_activation_extends(self):
        state, cmd = step(S.REST, vec(latissimus_dorsi="activation"))
        assert state is S.SHOULDER_EXT_ASSIST
        assert cmd.shoulder == "vent"

    def test_11_combined_both_orders(self):
        state, cmd = step(S.ELBOW_PAUSED, vec(medial_deltoid="onset"))
        assert state is S.COMBINED_ELBOW_PAUSED_SHOULDER_FLEX
        assert cmd.shoulder == "pump" and cmd.elbow == "hold"
        # Mirrored order per the reversed-path arrows.
        state, cmd = step(S.SHOULDER_PAUSED, vec(biceps="onset"))
        assert state is S.COMBINED_SHOULDER_PAUSED_ELBOW_FLEX
        assert cmd.elbow == "pump" and cmd.shoulder == "hold"


class TestFailSafe:
    def test_rest_all_rest_holds(self):
        state, cmd = step(S.REST, vec())
        assert state is S.REST
        assert all(cmd.directive(p) == "hold" for p in PAMS)

    def test_ambiguous_multi_trigger_keeps_state(self):
        state, cmd = step(S.REST, vec(biceps="onset", medial_deltoid="onset"))
        assert state is S.REST
        assert all(cmd.directive(p) == "hold" for p in PAMS)

    def test_input_class_partition(self):
        assert input_class(vec()) == "none"
        assert input_class(vec(biceps="onset")) == "b_onset"
        assert input_class(vec(triceps="activation", biceps="onset")) == "multi"
        assert input_class(vec(biceps="activation")) == "none"  # not a trigger


class TestTransitionTable:
    def test_total(self):
        rows = transition_table()
        expected = len(FsmState) * (len(INPUT_CLASSES) + len(MANUAL_INPUTS))
        assert len(rows) == expected
        seen = {(r["state"], r["input_class"]) for r in rows}
        assert len(seen) == expected

    def test_no_command_exceeds_auto_limit(self):
        # All pump targets in the table respect the 60 psi envelope; the
        # MotionCommand constructor enforces it, so building the table is
        # itself the check.
        for row in transition_table():
            assert set(row["pam_cmds"].split("/")) <= {"pump", "hold", "vent"}

    def test_rest_reachable_within_three_steps(self):
        rows = transition_table()
        nxt = {}
        for r in rows:
            nxt.setdefault(r["state"], set()).add(r["next_state"])
        reach = {S.REST.value: 0}
        frontier = {S.REST.value}
        for depth in (1, 2, 3):
            frontier = {
                s for s, outs in nxt.items()
                if s not in reach and outs & set(reach)
            }
            for s in frontier:
                reach[s] = depth
        missing = {s.value for s in FsmState} - set(reach)
        assert not missing, f"no <=3-step path to Rest from {missing}"

    def test_export_csv(self, tmp_path):
        from exosim.fsm import export_table_csv

        path = export_table_csv(tmp_path / "table.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "state,input_class,next_state,pam_cmds"
        assert len(lines) == 1 + len(transition_table())


class TestManualOverride:
    def test_vent_all_from_every_state(self):
        for state in FsmState:
            nxt, cmd = manual_override(state, ("vent_all",))
            assert nxt is S.EMERGENCY_VENT
            assert all(cmd.directive(p) == "vent" for p in PAMS)

    def test_pause_all(self):
        nxt, cmd = manual_override(S.ELBOW_FLEX_ASSIST, ("pause_all",))
        assert nxt is S.MANUAL_OVERRIDE
        assert all(cmd.directive(p) == "hold" for p in PAMS)

    def test_set_pressure_in_range(self):
        nxt, cmd = manual_override(S.REST, ("set_pressure", "elbow", 45.0))
        assert nxt is S.MANUAL_OVERRIDE
        assert cmd.elbow == "pump"
        assert cmd.target_for("elbow") == 45.0

    def test_set_pressure_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            manual_override(S.REST, ("set_pressure", "elbow", 61.0))

    def test_manual_wins_over_classifier(self):
        ctl = MotionController()
        ctl.on_manual(("pause_all",))
        before = ctl.state
        ctl.on_classes(vec(biceps="onset"))
        assert ctl.state is before is S.MANUAL_OVERRIDE

    def test_release_returns_to_rest(self):
        ctl = MotionController()
        ctl.on_manual(("pause_all",))
        ctl.on_manual(("resume_auto",))
        assert ctl.state is S.REST
        ctl.on_classes(vec(biceps="onset"))
        assert ctl.state is S.ELBOW_FLEX_ASSIST


CLASSES = st.sampled_from(["rest", "onset", "activation"])


@settings(max_examples=300, deadline=None)
@given(
    state=st.sampled_from(list(FsmState)),
    b=CLASSES, t=CLASSES, d=CLASSES, l=CLASSES,
)
def test_step_pure_and_safe(state, b, t, d, l):
    classes = vec(biceps=b, triceps=t, medial_deltoid=d, latissimus_dorsi=l)
    n1, c1 = step(state, classes)
    n2, c2 = step(state, classes)
    assert n1 is n2 and c1 == c2  # pure function of (state, input)
    for pam_name in PAMS:
        target = c1.target_for(pam_name)
        assert target is None or target <= AUTO_LIMIT_PSI


@settings(max_examples=300, deadline=None)
@given(state=st.sampled_from([S.ELBOW_FLEX_ASSIST, S.SHOULDER_FLEX_ASSIST,
                              S.COMBINED_ELBOW_PAUSED_SHOULDER_FLEX,
                              S.COMBINED_SHOULDER_PAUSED_ELBOW_FLEX]),
       b=CLASSES, t=CLASSES, d=CLASSES, l=CLASSES)
def test_single_antagonist_activation_never_vents(state, b, t, d, l):
    """From any actively assisting state, one antagonist activation pauses."""
    classes = vec(biceps=b, triceps=t, medial_deltoid=d, latissimus_dorsi=l)
    _, cmd = step(state, classes)
    assert all(cmd.directive(p) != "vent" for p in PAMS)
