"""Assisted-vs-unassisted strength comparisons.

Each repetition runs the closed loop over a scripted joint trajectory; the
agonist's EMG is synthesized from the residual-effort envelope the plant
reports, then MVC-normalized. Assisted and unassisted arms share noise seeds,
so disabling assistance reproduces the unassisted signal bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import dsp, pam, plant
from .loop import LatencyConfig, Scenario, Simulation
from .signals import (
    ActivationProfile,
    EmgTrace,
    MOTION_AGONIST,
    Muscle,
    NoiseConfig,
    synth_trace,
)

MOTION_JOINT = {
    "elbow_flexion": "elbow",
    "elbow_extension": "elbow",
    "shoulder_flexion": "shoulder",
    "shoulder_extension": "shoulder",
}

# Active phase of the comparison repetition (movement + hold), ms.
REP_DURATION_MS = 4000.0
ACTIVE_START_MS = 500.0


def comparison_scenario(motion: str, load_kg: float, rep_idx: int) -> Scenario:
    """One repetition: raise over 2 s, hold at 90 degrees; intent spans it."""
    if motion not in MOTION_JOINT:
        raise ValueError(f"unknown motion {motion!r}")
    joint = MOTION_JOINT[motion]
    flexion = motion.endswith("flexion")
    if flexion:
        script = [(0.0, 0.0), (ACTIVE_START_MS, 0.0), (2500.0, 90.0),
                  (REP_DURATION_MS, 90.0)]
    else:
        script = [(0.0, 90.0), (ACTIVE_START_MS, 90.0), (2500.0, 0.0),
                  (REP_DURATION_MS, 0.0)]
    agonist = MOTION_AGONIST[motion]
    profile = ActivationProfile(
        events=((ACTIVE_START_MS, REP_DURATION_MS - 50.0, 1.0),), ramp_ms=100.0
    )
    return Scenario(
        name=f"compare_{motion}_rep{rep_idx}",
        duration_ms=REP_DURATION_MS,
        profiles={agonist: profile},
        joint_scripts={joint: script},
        load_kg=load_kg,
        motion=motion,
    )


def _effort_envelope(timeline, joint: str, fs: float, n_samples: int) -> np.ndarray:
    t_ticks = timeline.ticks["t_ms"]
    effort = timeline.ticks[f"effort_{joint}"]
    t_samples = np.arange(n_samples) * (1000.0 / fs)
    return np.interp(t_samples, t_ticks, effort)


def _mean_rectified(samples: np.ndarray, fs: float, lo_ms: float, hi_ms: float) -> float:
    lo = int(round(lo_ms * fs / 1000.0))
    hi = int(round(hi_ms * fs / 1000.0))
    return float(np.mean(np.abs(samples[lo:hi])))


@dataclass
class ComparisonReport:
    motion: str
    load_kg: float
    reps: int
    seed: int
    assisted_mean_pct_mvc: float
    assisted_std_pct_mvc: float
    unassisted_mean_pct_mvc: float
    unassisted_std_pct_mvc: float
    reduction_ratio: float
    assisted_pct_mvc: list
    unassisted_pct_mvc: list

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(asdict(self), indent=2)
        if path is not None:
            Path(path).write_text(text)
        return text


def run_comparison(
    motion: str,
    assisted: bool = True,
    reps: int = 5,
    load_kg: float = 0.0,
    seed: int = 42,
    latency: LatencyConfig = LatencyConfig(),
    pam_cfg: pam.PamConfig = pam.PamConfig(),
    plant_cfg: plant.PlantConfig = plant.PlantConfig(),
) -> ComparisonReport:
    """MVC-normalized EMG comparison over ``reps`` repetitions.

    ``assisted=False`` keeps the exoskeleton disabled in both arms (control
    case; the reduction ratio is 1 by construction up to float identity).
    Classification uses ground-truth intent labels so the comparison is
    deterministic per seed.
    """
    if motion not in MOTION_JOINT:
        raise ValueError(f"unknown motion {motion!r}")
    joint = MOTION_JOINT[motion]
    agonist = MOTION_AGONIST[motion]
    fs = 500.0
    n_samples = int(round(REP_DURATION_MS * fs / 1000.0))
    root = np.random.default_rng(seed)

    assisted_pct, unassisted_pct = [], []
    for rep_idx in range(reps):
        scenario = comparison_scenario(motion, load_kg, rep_idx)
        rep_seed = int(root.integers(0, 2**31 - 1))
        emg_seed = int(root.integers(0, 2**31 - 1))

        pcts = {}
        for arm, arm_assisted in (("assisted", assisted), ("unassisted", False)):
            timeline = Simulation(
                scenario,
                latency,
                seed=rep_seed,
                pam_cfg=pam_cfg,
                plant_cfg=plant_cfg,
                assist_enabled=arm_assisted,
            ).run()
            envelope = _effort_envelope(timeline, joint, fs, n_samples)
            noise = NoiseConfig(seed=emg_seed)
            emg = _synth_from_envelope(agonist, envelope, fs, noise)
            mvc_trace = _synth_from_envelope(
                agonist, np.ones_like(envelope), fs, noise
            )
            rect = dsp.preprocess(emg)
            rect_mvc = dsp.preprocess(mvc_trace)
            level = _mean_rectified(rect.samples, fs, ACTIVE_START_MS, REP_DURATION_MS)
            mvc = _mean_rectified(rect_mvc.samples, fs, ACTIVE_START_MS, REP_DURATION_MS)
            pcts[arm] = min(100.0, 100.0 * level / mvc)
        assisted_pct.append(pcts["assisted"])
        unassisted_pct.append(pcts["unassisted"])

    a = np.array(assisted_pct)
    u = np.array(unassisted_pct)
    return ComparisonReport(
        motion=motion,
        load_kg=load_kg,
        reps=reps,
        seed=seed,
        assisted_mean_pct_mvc=float(a.mean()),
        assisted_std_pct_mvc=float(a.std()),
        unassisted_mean_pct_mvc=float(u.mean()),
        unassisted_std_pct_mvc=float(u.std()),
        reduction_ratio=float(u.mean() / a.mean()),
        assisted_pct_mvc=[float(v) for v in a],
        unassisted_pct_mvc=[float(v) for v in u],
    )


def _synth_from_envelope(
    muscle: Muscle, envelope: np.ndarray, fs: float, noise: NoiseConfig
) -> EmgTrace:
    """Envelope-modulated EMG with the standard texture and noise model."""
    base = synth_trace(
        ActivationProfile(events=((0.0, len(envelope) * 1000.0 / fs, 1.0),),
                          ramp_ms=0.001),
        muscle,
        len(envelope) * 1000.0 / fs,
        fs,
        NoiseConfig(baseline_sigma=0.0, powerline_amp=0.0, seed=noise.seed),
        amp_mv=1.0,
    )
    rng = np.random.default_rng(noise.seed + 1)
    baseline = rng.standard_normal(len(envelope)) * noise.baseline_sigma
    phase = rng.uniform(0.0, 2.0 * np.pi)
    t_ms = np.arange(len(envelope)) * (1000.0 / fs)
    samples = base.samples * envelope + baseline
    if noise.powerline_amp > 0:
        samples = samples + noise.powerline_amp * np.sin(
            2.0 * np.pi * 60.0 * t_ms / 1000.0 + phase
        )
    return EmgTrace(muscle=muscle, fs=fs, samples=samples, t0=0.0)
