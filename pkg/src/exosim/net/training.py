"""Training loop, evaluation, and dataset-to-epoch plumbing.

Training follows the reference protocol: Adam at 1e-4, batch 20, validation
monitored every epoch, learning rate annealed by 5 when validation loss
plateaus, and a stop after the second anneal that brings no new best. The
returned model carries the weights with the best validation accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dsp import FilterSpec, process_trace
from ..signals import (
    CLASS_INDEX,
    CLASS_ORDER,
    LabeledDataset,
    MUSCLE_PAIRS,
    Muscle,
    label_epochs,
)

# Training scope per muscle: the two motions of its joint. Other motions only
# add rest epochs with the same distribution the quiet spans already cover.
MUSCLE_MOTIONS = {
    Muscle.BICEPS: ("elbow_flexion", "elbow_extension"),
    Muscle.TRICEPS: ("elbow_flexion", "elbow_extension"),
    Muscle.MEDIAL_DELTOID: ("shoulder_flexion", "shoulder_extension"),
    Muscle.LATISSIMUS_DORSI: ("shoulder_flexion", "shoulder_extension"),
}
from .model import ArchConfig, Hyperparams, ModelParams, init_params, loss_and_grads, predict
from .optim import AdamState, adam_step

# Human-data test accuracies reported for the reference system; emitted
# alongside simulator results for context, never asserted.
REFERENCE_PAIR_ACCURACY = {
    "biceps_triceps": 0.9538,
    "deltoid_latissimus": 0.9701,
    "mean": 0.962,
}


@dataclass
class ConfusionMatrix:
    """3x3 class-count matrix over (true, predicted)."""

    counts: np.ndarray

    @classmethod
    def from_predictions(cls, y_true, y_pred) -> "ConfusionMatrix":
        counts = np.zeros((3, 3), dtype=int)
        for t, p in zip(np.asarray(y_true, int), np.asarray(y_pred, int)):
            counts[t, p] += 1
        return cls(counts=counts)

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(counts=self.counts + other.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        total = self.total
        return float(np.trace(self.counts)) / total if total else 0.0

    def as_dict(self) -> dict:
        return {
            "classes": [c.value for c in CLASS_ORDER],
            "counts": self.counts.tolist(),
            "accuracy": self.accuracy,
        }


@dataclass
class EpochArrays:
    """Flat epoch matrix for one muscle and split: X (N, L), y (N,)."""

    x: np.ndarray
    y: np.ndarray


def build_muscle_splits(
    dataset: LabeledDataset,
    muscle: Muscle,
    filter_spec: FilterSpec = FilterSpec(),
    window_ms: float = 1000.0,
    stride_ms: float = 250.0,
    motions: tuple[str, ...] | None = None,
) -> dict[str, EpochArrays]:
    """Preprocess one muscle channel into labeled epochs per split.

    ``motions`` restricts to those repetitions (e.g. the muscle's joint pair);
    other motions contribute only redundant rest epochs for this channel.
    """
    splits = dataset.split_by_repetition()
    out = {}
    for name, reps in splits.items():
        xs, ys = [], []
        for rep in reps:
            if motions is not None and rep.motion not in motions:
                continue
            trace = rep.traces[muscle]
            labels = label_epochs(trace, rep.profiles[muscle], window_ms, stride_ms)
            epochs = process_trace(trace, filter_spec, window_ms, stride_ms, labels)
            for ep in epochs:
                xs.append(ep.values)
                ys.append(CLASS_INDEX[ep.label])
        out[name] = EpochArrays(
            x=np.array(xs) if xs else np.zeros((0, int(window_ms))),
            y=np.array(ys, dtype=int),
        )
    return out


@dataclass
class TrainHistory:
    epochs: list[dict] = field(default_factory=list)

    def append(self, **kwargs):
        self.epochs.append(kwargs)

    @property
    def lr_trajectory(self) -> list[float]:
        return [e["lr"] for e in self.epochs]


@dataclass
class TrainedModel:
    muscle: Muscle
    params: ModelParams
    history: TrainHistory
    best_val_acc: float
    best_val_loss: float


def _eval_loss_acc(model: ModelParams, arrays: EpochArrays) -> tuple[float, float]:
    probs = predict(model, arrays.x)
    n = len(arrays.y)
    loss = -float(np.mean(np.log(probs[np.arange(n), arrays.y] + 1e-300)))
    acc = float(np.mean(probs.argmax(axis=1) == arrays.y))
    return loss, acc


def _balanced_batches(y: np.ndarray, batch_size: int, steps: int, rng):
    """Index batches with near-uniform class composition (oversampling).

    Rest windows dominate the natural stream ~4:1; balancing keeps the
    minority-class gradient alive from the first step.
    """
    classes = sorted(np.unique(y))
    pools = {c: np.flatnonzero(y == c) for c in classes}
    shuffled = {c: rng.permutation(pools[c]) for c in classes}
    cursors = {c: 0 for c in classes}
    slot = 0
    for _ in range(steps):
        batch = np.empty(batch_size, dtype=int)
        for i in range(batch_size):
            c = classes[slot % len(classes)]
            slot += 1
            if cursors[c] >= len(shuffled[c]):
                shuffled[c] = rng.permutation(pools[c])
                cursors[c] = 0
            batch[i] = shuffled[c][cursors[c]]
            cursors[c] += 1
        yield batch


def train(
    splits: dict[str, EpochArrays],
    hyper: Hyperparams = Hyperparams(),
    arch: ArchConfig | None = None,
    muscle: Muscle = Muscle.BICEPS,
    log=None,
    dtype=np.float64,
    balanced_batches: bool = True,
) -> TrainedModel:
    """Train one per-muscle classifier on pre-built train/val splits."""
    train_arrays = EpochArrays(splits["train"].x.astype(dtype), splits["train"].y)
    val_arrays = EpochArrays(splits["val"].x.astype(dtype), splits["val"].y)
    if len(train_arrays.y) < hyper.batch_size:
        raise ValueError(
            f"training set ({len(train_arrays.y)}) smaller than one batch "
            f"({hyper.batch_size})"
        )
    if arch is None:
        arch = ArchConfig(
            input_len=train_arrays.x.shape[1],
            dropout=hyper.dropout,
            leaky_slope=hyper.leaky_slope,
        )
    rng = np.random.default_rng(hyper.seed)
    model = init_params(arch, seed=hyper.seed, dtype=dtype)
    if not balanced_batches:
        # Start the output layer at the class priors so the first epochs
        # refine discrimination instead of relearning the base rates.
        priors = np.bincount(train_arrays.y, minlength=arch.n_classes).astype(float)
        priors /= priors.sum()
        model.weights["dense_b"] = np.log(priors + 1e-8).astype(dtype)
    state = AdamState.for_params(model.weights)
    lr = hyper.learning_rate
    history = TrainHistory()

    best_val_loss = np.inf
    best_val_acc = -np.inf
    best_snapshot = model.copy()
    epochs_since_best = 0
    decays_without_improvement = 0

    n = len(train_arrays.y)
    steps_per_epoch = max(1, n // hyper.batch_size)
    for epoch_idx in range(hyper.max_epochs):
        if balanced_batches:
            batches = _balanced_batches(
                train_arrays.y, hyper.batch_size, steps_per_epoch, rng
            )
        else:
            perm = rng.permutation(n)
            batches = (
                perm[lo : lo + hyper.batch_size]
                for lo in range(0, n, hyper.batch_size)
            )
        losses = []
        for batch in batches:
            grads, loss = loss_and_grads(
                model, train_arrays.x[batch], train_arrays.y[batch], rng=rng
            )
            model.weights, state = adam_step(model.weights, grads, state, lr)
            losses.append(loss)
        val_loss, val_acc = _eval_loss_acc(model, val_arrays)
        history.append(
            epoch=epoch_idx,
            lr=lr,
            train_loss=float(np.mean(losses)),
            val_loss=val_loss,
            val_acc=val_acc,
        )
        if log:
            log(
                f"[{muscle.value}] epoch {epoch_idx:3d} lr {lr:.2e} "
                f"train {np.mean(losses):.4f} val {val_loss:.4f} acc {val_acc:.4f}"
            )
        if val_acc > best_val_acc:
            best_val_acc = val_acc
            best_snapshot = model.copy()
        if val_loss < best_val_loss:
            best_val_loss = val_loss
            epochs_since_best = 0
            decays_without_improvement = 0
        else:
            epochs_since_best += 1
        if epochs_since_best >= hyper.early_stop_patience:
            if decays_without_improvement >= 2:
                break  # second successive decay brought no new best
            lr /= hyper.anneal_factor
            decays_without_improvement += 1
            epochs_since_best = 0

    return TrainedModel(
        muscle=muscle,
        params=best_snapshot,
        history=history,
        best_val_acc=best_val_acc,
        best_val_loss=best_val_loss,
    )


def evaluate(model: ModelParams, test: EpochArrays) -> ConfusionMatrix:
    """Confusion matrix of the model over a held-out epoch set."""
    if len(test.y) == 0:
        raise ValueError("empty test set")
    preds = predict(model, test.x).argmax(axis=1)
    return ConfusionMatrix.from_predictions(test.y, preds)


def train_all_muscles(
    dataset: LabeledDataset,
    hyper: Hyperparams = Hyperparams(),
    filter_spec: FilterSpec = FilterSpec(),
    log=None,
) -> tuple[dict[Muscle, TrainedModel], dict]:
    """Train one model per muscle channel; returns models and an eval report.

    The report carries per-muscle and per-pair confusion matrices (pairs pool
    the two channels of a joint) plus the reference accuracies for context.
    """
    models: dict[Muscle, TrainedModel] = {}
    confusions: dict[Muscle, ConfusionMatrix] = {}
    for i, muscle in enumerate(Muscle):
        # Train/validate on the muscle's joint motions; test on every motion's
        # held-out repetitions (the stream the model sees in deployment).
        splits = build_muscle_splits(
            dataset, muscle, filter_spec, motions=MUSCLE_MOTIONS[muscle]
        )
        test_all = build_muscle_splits(dataset, muscle, filter_spec)["test"]
        per_muscle_hyper = Hyperparams(
            learning_rate=hyper.learning_rate,
            batch_size=hyper.batch_size,
            dropout=hyper.dropout,
            leaky_slope=hyper.leaky_slope,
            anneal_factor=hyper.anneal_factor,
            early_stop_patience=hyper.early_stop_patience,
            max_epochs=hyper.max_epochs,
            seed=hyper.seed + i,
        )
        models[muscle] = train(splits, per_muscle_hyper, muscle=muscle, log=log)
        confusions[muscle] = evaluate(models[muscle].params, test_all)

    report = {
        "per_muscle": {
            m.value: confusions[m].as_dict() for m in Muscle
        },
        "pairs": {},
        "reference_pair_accuracy": REFERENCE_PAIR_ACCURACY,
    }
    for pair_name, (m1, m2) in MUSCLE_PAIRS.items():
        pooled = confusions[m1] + confusions[m2]
        report["pairs"][pair_name] = pooled.as_dict()
    report["pairs_mean_accuracy"] = float(
        np.mean([report["pairs"][p]["accuracy"] for p in MUSCLE_PAIRS])
    )
    return models, report
