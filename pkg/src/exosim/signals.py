"""Synthetic EMG generation: labeled traces and datasets for four upper-limb muscles.

Traces are envelope-modulated Gaussian noise shaped to the typical surface-EMG
band (20-150 Hz), with an additive white baseline and a 60 Hz powerline tone.
Generation is fully deterministic for a given (profile, seed) pair.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.signal import butter, sosfiltfilt

# Linear intensity -> amplitude map (mV at intensity 1.0). Absolute scale is
# arbitrary; chosen so default rest/burst contrast is ~40 dB.
DEFAULT_AMP_MV = 1.0

# Surface-EMG energy band used to texture the synthetic signal.
EMG_BAND_HZ = (20.0, 150.0)

MIN_FS_HZ = 500.0  # Nyquist floor for the 250 Hz preprocessing cutoff


class Muscle(str, Enum):
    BICEPS = "biceps"
    TRICEPS = "triceps"
    MEDIAL_DELTOID = "medial_deltoid"
    LATISSIMUS_DORSI = "latissimus_dorsi"


class MuscleClass(str, Enum):
    """Per-window activity class, also the classifier's output alphabet."""

    REST = "rest"
    ONSET = "onset"
    ACTIVATION = "activation"


CLASS_ORDER = (MuscleClass.REST, MuscleClass.ONSET, MuscleClass.ACTIVATION)
CLASS_INDEX = {c: i for i, c in enumerate(CLASS_ORDER)}

# Motion name -> muscle whose activity drives it.
MOTION_AGONIST = {
    "elbow_flexion": Muscle.BICEPS,
    "elbow_extension": Muscle.TRICEPS,
    "shoulder_flexion": Muscle.MEDIAL_DELTOID,
    "shoulder_extension": Muscle.LATISSIMUS_DORSI,
}
MOTIONS = tuple(MOTION_AGONIST)

# Muscle pairs evaluated together (agonist/antagonist per joint).
MUSCLE_PAIRS = {
    "biceps_triceps": (Muscle.BICEPS, Muscle.TRICEPS),
    "deltoid_latissimus": (Muscle.MEDIAL_DELTOID, Muscle.LATISSIMUS_DORSI),
}


@dataclass(frozen=True)
class ActivationProfile:
    """Muscle activation schedule: (start_ms, end_ms, intensity) events.

    Events must be time-ordered and non-overlapping; intensity is 0 outside
    events. Each event ramps linearly over ``ramp_ms`` at both edges so the
    envelope is exactly zero outside the event span.
    """

    events: tuple[tuple[float, float, float], ...] = ()
    ramp_ms: float = 100.0

    def __post_init__(self):
        prev_end = -np.inf
        for start, end, intensity in self.events:
            if end <= start:
                raise ValueError(f"event ends before it starts: ({start}, {end})")
            if start < prev_end:
                raise ValueError("events overlap or are out of order")
            if not 0.0 <= intensity <= 1.0:
                raise ValueError(f"intensity {intensity} outside [0, 1]")
            prev_end = end

    def envelope(self, t_ms: np.ndarray) -> np.ndarray:
        """Evaluate the activation envelope at the given times (ms)."""
        env = np.zeros_like(t_ms, dtype=float)
        for start, end, intensity in self.events:
            ramp = min(self.ramp_ms, (end - start) / 2.0)
            inside = (t_ms >= start) & (t_ms < end)
            seg = np.full(np.count_nonzero(inside), intensity)
            ts = t_ms[inside]
            if ramp > 0:
                seg = np.minimum(seg, intensity * (ts - start) / ramp)
                seg = np.minimum(seg, intensity * (end - ts) / ramp)
            env[inside] = seg
        return env


@dataclass(frozen=True)
class NoiseConfig:
    """Additive noise model: white baseline plus a 60 Hz powerline tone."""

    baseline_sigma: float = 0.01  # mV
    powerline_amp: float = 0.05  # mV at 60 Hz
    seed: int = 0

    def __post_init__(self):
        if self.baseline_sigma < 0 or self.powerline_amp < 0:
            raise ValueError("noise amplitudes must be non-negative")


@dataclass
class EmgTrace:
    """Uniformly sampled voltage series for one muscle channel."""

    muscle: Muscle
    fs: float  # Hz
    samples: np.ndarray  # mV
    t0: float = 0.0  # ms

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.fs < MIN_FS_HZ:
            raise ValueError(f"fs {self.fs} Hz below the {MIN_FS_HZ:g} Hz minimum")

    @property
    def duration_ms(self) -> float:
        return len(self.samples) * 1000.0 / self.fs

    @property
    def t_ms(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.samples)) * (1000.0 / self.fs)


def _emg_shaping_sos(fs: float):
    lo, hi = EMG_BAND_HZ
    return butter(4, [lo, hi], btype="band", fs=fs, output="sos")


def synth_trace(
    profile: ActivationProfile,
    muscle: Muscle,
    duration_ms: float,
    fs: float,
    noise: NoiseConfig,
    amp_mv: float = DEFAULT_AMP_MV,
) -> EmgTrace:
    """Generate one synthetic EMG trace whose envelope follows ``profile``.

    The stochastic texture is unit-RMS Gaussian noise band-limited to
    20-150 Hz, scaled by the activation envelope and ``amp_mv``. Identical
    (profile, seed) inputs produce bit-identical traces.
    """
    if duration_ms <= 0:
        raise ValueError("duration_ms must be positive")
    if fs < MIN_FS_HZ:
        raise ValueError(f"fs {fs} Hz violates the Nyquist floor ({MIN_FS_HZ:g} Hz)")

    n = int(round(duration_ms * fs / 1000.0))
    t_ms = np.arange(n) * (1000.0 / fs)
    rng = np.random.default_rng(noise.seed)

    # Draw order is fixed so seeds stay comparable across parameterizations.
    raw = rng.standard_normal(n)
    baseline = rng.standard_normal(n) * noise.baseline_sigma
    phase = rng.uniform(0.0, 2.0 * np.pi)

    shaped = sosfiltfilt(_emg_shaping_sos(fs), raw)
    rms = float(np.sqrt(np.mean(shaped**2)))
    if rms > 0:
        shaped = shaped / rms

    env = profile.envelope(t_ms)
    samples = shaped * env * amp_mv + baseline
    if noise.powerline_amp > 0:
        samples = samples + noise.powerline_amp * np.sin(
            2.0 * np.pi * 60.0 * t_ms / 1000.0 + phase
        )
    return EmgTrace(muscle=muscle, fs=fs, samples=samples, t0=0.0)


def window_grid(n_samples: int, fs: float, window_ms: float, stride_ms: float):
    """Start indices of full analysis windows over an ``n_samples`` trace."""
    if window_ms <= 0 or stride_ms <= 0:
        raise ValueError("window_ms and stride_ms must be positive")
    win_n = int(round(window_ms * fs / 1000.0))
    stride_n = int(round(stride_ms * fs / 1000.0))
    if n_samples < win_n:
        return [], win_n
    count = (n_samples - win_n) // stride_n + 1
    return [k * stride_n for k in range(count)], win_n


def label_epochs(
    trace: EmgTrace,
    profile: ActivationProfile,
    window_ms: float = 1000.0,
    stride_ms: float = 250.0,
) -> list[MuscleClass]:
    """Ground-truth class per analysis window.

    A window spanning [T, T + window_ms] (closed interval) is ``onset`` iff it
    contains an event start, ``activation`` iff it lies fully inside an event
    without containing a start, ``rest`` otherwise.
    """
    starts, _ = window_grid(len(trace.samples), trace.fs, window_ms, stride_ms)
    labels = []
    for start_idx in starts:
        w_lo = trace.t0 + start_idx * 1000.0 / trace.fs
        w_hi = w_lo + window_ms
        label = MuscleClass.REST
        for ev_start, ev_end, _ in profile.events:
            if w_lo <= ev_start <= w_hi:
                label = MuscleClass.ONSET
                break
            if ev_start <= w_lo and w_hi <= ev_end:
                label = MuscleClass.ACTIVATION
        labels.append(label)
    return labels


@dataclass(frozen=True)
class DatasetSpec:
    """Recipe for a labeled multi-motion dataset."""

    motions: tuple[str, ...] = MOTIONS
    reps: int = 50
    duration_ms: float = 4000.0
    fs: float = 500.0
    seed: int = 42
    baseline_sigma: float = 0.01
    powerline_amp: float = 0.05
    amp_mv: float = DEFAULT_AMP_MV
    ramp_ms: float = 100.0
    # Per-repetition jitter ranges for the agonist burst.
    event_start_ms: tuple[float, float] = (1000.0, 1800.0)
    event_len_ms: tuple[float, float] = (1200.0, 1800.0)
    intensity: tuple[float, float] = (0.7, 1.0)

    def __post_init__(self):
        if not self.motions:
            raise ValueError("at least one motion required")
        unknown = [m for m in self.motions if m not in MOTION_AGONIST]
        if unknown:
            raise ValueError(f"unknown motions: {unknown}")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")


@dataclass
class Repetition:
    """One recorded repetition: all four muscle channels plus ground truth."""

    motion: str
    index: int
    traces: dict[Muscle, EmgTrace]
    profiles: dict[Muscle, ActivationProfile]
    channel_seeds: dict[Muscle, int]


@dataclass
class LabeledDataset:
    spec: DatasetSpec
    repetitions: list[Repetition]

    def split_by_repetition(self) -> dict[str, list[Repetition]]:
        """60/20/20 train/val/test split, per motion, by repetition index."""
        out: dict[str, list[Repetition]] = {"train": [], "val": [], "test": []}
        n = self.spec.reps
        n_train = int(n * 0.6)
        n_val = int(n * 0.2)
        for rep in self.repetitions:
            if rep.index < n_train:
                out["train"].append(rep)
            elif rep.index < n_train + n_val:
                out["val"].append(rep)
            else:
                out["test"].append(rep)
        return out


def make_dataset(spec: DatasetSpec) -> LabeledDataset:
    """Generate ``spec.reps`` repetitions of each motion with ground truth.

    Each repetition activates the motion's agonist muscle once, with jittered
    burst timing and intensity; the other channels record rest. Noise seeds
    per channel are derived from ``spec.seed``, so regeneration is bit-exact.
    """
    root = np.random.default_rng(spec.seed)
    reps: list[Repetition] = []
    quiet = ActivationProfile(events=(), ramp_ms=spec.ramp_ms)
    for motion in spec.motions:
        agonist = MOTION_AGONIST[motion]
        for idx in range(spec.reps):
            start = root.uniform(*spec.event_start_ms)
            length = root.uniform(*spec.event_len_ms)
            intensity = root.uniform(*spec.intensity)
            # Clip the jittered burst into the trace span (short traces).
            start = min(start, spec.duration_ms * 0.5)
            end = min(start + length, spec.duration_ms - 50.0)
            end = max(end, start + 100.0)
            burst = ActivationProfile(
                events=((start, end, intensity),), ramp_ms=spec.ramp_ms
            )
            traces, profiles, seeds = {}, {}, {}
            for muscle in Muscle:
                profile = burst if muscle is agonist else quiet
                ch_seed = int(root.integers(0, 2**31 - 1))
                noise = NoiseConfig(
                    baseline_sigma=spec.baseline_sigma,
                    powerline_amp=spec.powerline_amp,
                    seed=ch_seed,
                )
                traces[muscle] = synth_trace(
                    profile, muscle, spec.duration_ms, spec.fs, noise, spec.amp_mv
                )
                profiles[muscle] = profile
                seeds[muscle] = ch_seed
            reps.append(
                Repetition(
                    motion=motion,
                    index=idx,
                    traces=traces,
                    profiles=profiles,
                    channel_seeds=seeds,
                )
            )
    return LabeledDataset(spec=spec, repetitions=reps)


# ---------------------------------------------------------------------------
# Persistence: one directory per motion; CSV traces + JSON sidecars.
# Float formatting uses 17 significant digits so round-trips are bit-exact.
# ---------------------------------------------------------------------------


def save_dataset(dataset: LabeledDataset, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec = dataset.spec
    manifest = {
        "motions": list(spec.motions),
        "reps": spec.reps,
        "duration_ms": spec.duration_ms,
        "fs": spec.fs,
        "seed": spec.seed,
        "baseline_sigma": spec.baseline_sigma,
        "powerline_amp": spec.powerline_amp,
        "amp_mv": spec.amp_mv,
        "ramp_ms": spec.ramp_ms,
        "event_start_ms": list(spec.event_start_ms),
        "event_len_ms": list(spec.event_len_ms),
        "intensity": list(spec.intensity),
    }
    (out / "dataset.json").write_text(json.dumps(manifest, indent=2))
    for rep in dataset.repetitions:
        motion_dir = out / rep.motion
        motion_dir.mkdir(exist_ok=True)
        sidecar = {
            "motion": rep.motion,
            "rep": rep.index,
            "fs": spec.fs,
            "ramp_ms": spec.ramp_ms,
            "events": {
                m.value: [list(ev) for ev in rep.profiles[m].events] for m in Muscle
            },
            "channel_seeds": {m.value: rep.channel_seeds[m] for m in Muscle},
        }
        (motion_dir / f"rep_{rep.index:03d}.json").write_text(
            json.dumps(sidecar, indent=2)
        )
        for muscle, trace in rep.traces.items():
            path = motion_dir / f"rep_{rep.index:03d}_{muscle.value}.csv"
            with open(path, "w") as f:
                f.write("t_ms,mv\n")
                for t, v in zip(trace.t_ms, trace.samples):
                    f.write(f"{t:.17g},{v:.17g}\n")
    return out


def load_dataset(in_dir: str | Path) -> LabeledDataset:
    root = Path(in_dir)
    manifest = json.loads((root / "dataset.json").read_text())
    spec = DatasetSpec(
        motions=tuple(manifest["motions"]),
        reps=manifest["reps"],
        duration_ms=manifest["duration_ms"],
        fs=manifest["fs"],
        seed=manifest["seed"],
        baseline_sigma=manifest["baseline_sigma"],
        powerline_amp=manifest["powerline_amp"],
        amp_mv=manifest["amp_mv"],
        ramp_ms=manifest["ramp_ms"],
        event_start_ms=tuple(manifest["event_start_ms"]),
        event_len_ms=tuple(manifest["event_len_ms"]),
        intensity=tuple(manifest["intensity"]),
    )
    reps = []
    for motion in spec.motions:
        motion_dir = root / motion
        for sidecar_path in sorted(motion_dir.glob("rep_*.json")):
            meta = json.loads(sidecar_path.read_text())
            traces, profiles, seeds = {}, {}, {}
            for muscle in Muscle:
                csv_path = motion_dir / f"rep_{meta['rep']:03d}_{muscle.value}.csv"
                data = np.loadtxt(csv_path, delimiter=",", skiprows=1)
                traces[muscle] = EmgTrace(
                    muscle=muscle, fs=spec.fs, samples=data[:, 1], t0=0.0
                )
                profiles[muscle] = ActivationProfile(
                    events=tuple(tuple(ev) for ev in meta["events"][muscle.value]),
                    ramp_ms=meta["ramp_ms"],
                )
                seeds[muscle] = meta["channel_seeds"][muscle.value]
            reps.append(
                Repetition(
                    motion=motion,
                    index=meta["rep"],
                    traces=traces,
                    profiles=profiles,
                    channel_seeds=seeds,
                )
            )
    return LabeledDataset(spec=spec, repetitions=reps)
