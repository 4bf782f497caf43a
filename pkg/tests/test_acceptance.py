"""Acceptance gate: every primary criterion at its stated tolerance.

Each test prints one PASS/FAIL line (run pytest with -s to see them inline)
and enforces the criterion's runtime budget. The training criterion builds
the full default dataset and all four muscle models once per session.
"""

import json
import time
from contextlib import contextmanager

import numpy as np
import pytest

from exosim import dsp, pam
from exosim.compare import run_comparison
from exosim.fsm import FsmState, MuscleClassVector, manual_override, step, transition_table
from exosim.loop import (
    LatencyConfig,
    latency_probe_scenario,
    measure_latency,
    motion_scenario,
    replay_motions_1_to_4,
    run_scenario,
)
from exosim.net.checkpoint import load_checkpoint, save_checkpoint
from exosim.net.model import ArchConfig, Hyperparams, init_params, loss_and_grads, predict
from exosim.net.training import train_all_muscles
from exosim.signals import DatasetSpec, EmgTrace, Muscle, MuscleClass, make_dataset

RESULTS = []


@contextmanager
def criterion(name: str, budget_s: float):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {name}: FAIL ({time.perf_counter() - t0:.1f}s)")
        RESULTS.append((name, False))
        raise
    elapsed = time.perf_counter() - t0
    ok = elapsed < budget_s
    print(f"ACCEPTANCE {name}: PASS ({elapsed:.1f}s, budget {budget_s:.0f}s)")
    RESULTS.append((name, True))
    assert ok, f"{name} exceeded runtime budget: {elapsed:.1f}s >= {budget_s}s"


def test_pam_anchors():
    with criterion("pam-anchors", budget_s=1.0):
        assert pam.static_force(80.0, 0.0) == 897.0
        assert pam.max_contraction(80.0) == 87.0
        # Randomized valve sequences never exceed the relief cap.
        rng = np.random.default_rng(0)
        state = pam.PamState()
        for _ in range(400):
            valve = ("fill", "vent", "closed")[rng.integers(0, 3)]
            state = pam.update(state, valve, float(rng.uniform(0, 90)), 25.0)
            assert 0.0 <= state.pressure <= 70.0
        curves = pam.characterize()
        assert len(curves) == 8 and sorted(curves) == [10, 20, 30, 40, 50, 60, 70, 80]
        for curve in curves.values():
            forces = [f for _, f in curve]
            assert all(a > b for a, b in zip(forces, forces[1:]))


def test_dsp_responses():
    with criterion("dsp-responses", budget_s=5.0):
        fs = 500.0
        t = np.arange(2000) / fs

        def fft_gain_db(op, freq):
            trace = EmgTrace(Muscle.BICEPS, fs, np.sin(2 * np.pi * freq * t))
            out = op(trace)
            k = int(round(freq * len(t) / fs))
            a_in = np.abs(np.fft.rfft(trace.samples))[k]
            a_out = np.abs(np.fft.rfft(out.samples))[k]
            return 20.0 * np.log10(a_out / a_in)

        assert fft_gain_db(dsp.notch, 60.0) <= -30.0
        assert abs(fft_gain_db(dsp.bandpass, 100.0)) <= 1.0
        assert abs(fft_gain_db(dsp.notch, 100.0)) <= 1.0
        assert fft_gain_db(dsp.bandpass, 2.0) <= -20.0


def test_windowing_count_formula():
    with criterion("windowing", budget_s=1.0):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            length_ms = int(rng.integers(0, 4000)) * 2  # multiples of 2 ms
            n = length_ms // 2  # samples at 500 Hz
            trace = EmgTrace(Muscle.BICEPS, 500.0, np.zeros(n))
            expected = max(0, (length_ms - 1000) // 250 + 1)
            assert len(dsp.window(trace)) == expected, length_ms


def test_gradient_correctness():
    with criterion("gradient-check", budget_s=30.0):
        arch = ArchConfig(input_len=8, conv_channels=(2,), kernel=5, pool=4,
                          lstm_hidden=4, dropout=0.3)
        model = init_params(arch, seed=3)
        x = np.random.default_rng(11).random((3, 8))
        y = np.array([0, 1, 2])
        fresh = lambda: np.random.default_rng(7)
        grads, _ = loss_and_grads(model, x, y, rng=fresh())
        eps = 1e-3
        worst = 0.0
        for name, w in model.weights.items():
            it = np.nditer(w, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = w[idx]
                w[idx] = orig + eps
                _, hi = loss_and_grads(model, x, y, rng=fresh())
                w[idx] = orig - eps
                _, lo = loss_and_grads(model, x, y, rng=fresh())
                w[idx] = orig
                fd = (hi - lo) / (2 * eps)
                denom = max(1e-6, abs(fd), abs(grads[name][idx]))
                worst = max(worst, abs(fd - grads[name][idx]) / denom)
        assert worst < 1e-4, f"max relative error {worst:.2e}"


@pytest.fixture(scope="module")
def trained_bundle(tmp_path_factory):
    dataset = make_dataset(DatasetSpec(reps=50, seed=42))
    t0 = time.perf_counter()
    models, report = train_all_muscles(dataset, Hyperparams(seed=42))
    elapsed = time.perf_counter() - t0
    path = tmp_path_factory.mktemp("ckpt") / "exosim.ckpt.json"
    save_checkpoint(path, {m: tm.params for m, tm in models.items()},
                    Hyperparams(seed=42))
    return models, report, elapsed, path, dataset


def test_training_accuracy(trained_bundle):
    models, report, elapsed, path, dataset = trained_bundle
    with criterion("training-accuracy", budget_s=600.0 - min(elapsed, 599.0)):
        for pair, cm in report["pairs"].items():
            reference = report["reference_pair_accuracy"][pair]
            print(
                f"  pair {pair}: simulator accuracy {cm['accuracy']*100:.2f}% "
                f"(human-data reference {reference*100:.2f}%)"
            )
            print(f"  confusion {pair}: {cm['counts']}")
            assert cm["accuracy"] >= 0.90, f"{pair} below 0.90"
        print(
            f"  mean pair accuracy {report['pairs_mean_accuracy']*100:.2f}% "
            f"(reference mean {report['reference_pair_accuracy']['mean']*100:.2f}%)"
        )
        assert elapsed < 600.0, f"training took {elapsed:.0f}s >= 600s"

        # Checkpoint round-trip reproduces inference bit for bit.
        loaded, _, _ = load_checkpoint(path)
        x = np.random.default_rng(0).random((8, 500))
        for muscle, tm in models.items():
            assert np.array_equal(predict(tm.params, x), predict(loaded[muscle], x))


def test_model_driven_motion_replay(trained_bundle):
    models, _, _, _, _ = trained_bundle
    with criterion("model-driven-replay", budget_s=120.0):
        results = replay_motions_1_to_4(
            LatencyConfig(), seed=42,
            models={m: tm.params for m, tm in models.items()},
        )
        for name in ("motion1", "motion2", "motion3", "motion4"):
            print(f"  {name}: entered={results[name]['entered']} "
                  f"actuated={results[name]['actuated']}")
        assert results["all_passed"]


def _vec(**kwargs):
    return MuscleClassVector(**{k: MuscleClass(v) for k, v in kwargs.items()})


def test_fsm_criteria():
    with criterion("fsm", budget_s=1.0):
        # Table totality over class and manual input classes.
        rows = transition_table()
        assert len(rows) == len(FsmState) * 10
        assert len({(r["state"], r["input_class"]) for r in rows}) == len(rows)

        # The eleven scripted transitions.
        s = FsmState
        assert step(s.REST, _vec(biceps="onset"))[0] is s.ELBOW_FLEX_ASSIST
        assert step(s.ELBOW_FLEX_ASSIST, _vec(triceps="activation"))[0] is s.ELBOW_PAUSED
        assert step(s.ELBOW_PAUSED, _vec(triceps="activation"))[0] is s.ELBOW_VENTING
        assert step(s.ELBOW_VENTING, _vec())[0] is s.REST
        assert step(s.ELBOW_FLEX_ASSIST, _vec(biceps="activation"))[0] is s.ELBOW_FLEX_ASSIST
        assert step(s.REST, _vec(triceps="activation"))[0] is s.ELBOW_EXT_ASSIST
        assert step(s.REST, _vec(medial_deltoid="onset"))[0] is s.SHOULDER_FLEX_ASSIST
        assert step(s.SHOULDER_FLEX_ASSIST, _vec(latissimus_dorsi="activation"))[0] is s.SHOULDER_PAUSED
        assert step(s.SHOULDER_PAUSED, _vec(latissimus_dorsi="activation"))[0] is s.SHOULDER_VENTING
        assert step(s.REST, _vec(latissimus_dorsi="activation"))[0] is s.SHOULDER_EXT_ASSIST
        assert step(s.ELBOW_PAUSED, _vec(medial_deltoid="onset"))[0] is s.COMBINED_ELBOW_PAUSED_SHOULDER_FLEX
        assert step(s.SHOULDER_PAUSED, _vec(biceps="onset"))[0] is s.COMBINED_SHOULDER_PAUSED_ELBOW_FLEX

        # EmergencyVent in one manual command from every state.
        for state in FsmState:
            assert manual_override(state, ("vent_all",))[0] is s.EMERGENCY_VENT

        # Motion 1-4 class-sequence replays reproduce the demo trajectories.
        scripts = {
            "motion1": (
                [_vec(biceps="onset"), _vec(biceps="activation"),
                 _vec(triceps="activation"), _vec(triceps="activation"), _vec()],
                [s.ELBOW_FLEX_ASSIST, s.ELBOW_FLEX_ASSIST, s.ELBOW_PAUSED,
                 s.ELBOW_VENTING, s.REST],
            ),
            "motion2": (
                [_vec(triceps="activation"), _vec(triceps="activation"), _vec()],
                [s.ELBOW_EXT_ASSIST, s.ELBOW_EXT_ASSIST, s.REST],
            ),
            "motion3": (
                [_vec(medial_deltoid="onset"), _vec(latissimus_dorsi="activation"),
                 _vec(latissimus_dorsi="activation"), _vec()],
                [s.SHOULDER_FLEX_ASSIST, s.SHOULDER_PAUSED, s.SHOULDER_VENTING,
                 s.REST],
            ),
            "motion4": (
                [_vec(latissimus_dorsi="activation"), _vec()],
                [s.SHOULDER_EXT_ASSIST, s.REST],
            ),
        }
        for name, (sequence, expected) in scripts.items():
            state = s.REST
            trajectory = []
            for classes in sequence:
                state, _ = step(state, classes)
                trajectory.append(state)
            assert trajectory == expected, f"{name}: {trajectory}"


def test_latency_budget():
    with criterion("latency", budget_s=10.0):
        timeline = run_scenario(latency_probe_scenario(reps=5), LatencyConfig(),
                                seed=42)
        stats = measure_latency(timeline)
        print(
            f"  latency mean {stats['mean_ms']:.1f} ms "
            f"[{stats['min_ms']:.1f}, {stats['max_ms']:.1f}]; "
            f"reference band {stats['reference_band_ms']}: "
            f"{stats['reference_band_flag']}"
        )
        assert 500.0 <= stats["mean_ms"] <= 600.0
        for entry in stats["entries"]:
            assert 500.0 <= entry["latency_ms"] <= 600.0
            assert entry["latency_ms"] == pytest.approx(
                entry["component_sum_ms"], abs=1e-9
            )
        assert stats["reference_band_flag"] in ("pass", "warn")


def test_strength_augmentation():
    with criterion("strength-augmentation", budget_s=120.0):
        targets = [
            ("elbow_flexion", 0.0, 3.9, 0.15),
            ("shoulder_flexion", 0.0, 3.5, 0.15),
            ("elbow_flexion", 6.8, 1.4, 0.20),
            ("shoulder_flexion", 6.8, 1.6, 0.20),
        ]
        for motion, load, target, tol in targets:
            report = run_comparison(motion, reps=5, load_kg=load, seed=42)
            ratio = report.reduction_ratio
            print(f"  {motion} load {load:g} kg: ratio {ratio:.2f} "
                  f"(target {target} +/- {tol*100:.0f}%)")
            assert target * (1 - tol) <= ratio <= target * (1 + tol), (
                f"{motion}@{load}: {ratio:.3f} not within {tol*100:.0f}% of {target}"
            )
        control = run_comparison("elbow_flexion", assisted=False, reps=5, seed=42)
        print(f"  zero-assist control ratio {control.reduction_ratio:.4f}")
        assert abs(control.reduction_ratio - 1.0) <= 0.02


def test_timeline_determinism(tmp_path):
    with criterion("determinism", budget_s=60.0):
        for scenario in (latency_probe_scenario(reps=2),
                         motion_scenario("shoulder_flexion")):
            a = run_scenario(scenario, LatencyConfig(), seed=42)
            b = run_scenario(scenario, LatencyConfig(), seed=42)
            pa = a.to_jsonl(tmp_path / "a.jsonl")
            pb = b.to_jsonl(tmp_path / "b.jsonl")
            assert pa.read_bytes() == pb.read_bytes(), scenario.name


def test_zzz_acceptance_summary():
    print("\n=== acceptance summary ===")
    for name, ok in RESULTS:
        print(f"  {name}: {'PASS' if ok else 'FAIL'}")
    assert all(ok for _, ok in RESULTS)
