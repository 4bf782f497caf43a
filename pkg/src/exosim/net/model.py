"""Per-muscle CNN+LSTM intent classifier.

Two convolutional cells (conv -> conv -> batch-norm -> max-pool -> LeakyReLU)
feed a 4-unit LSTM; the final hidden state passes through dropout and a dense
layer to three class logits (rest / onset / activation).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..signals import CLASS_ORDER, MuscleClass
from . import layers


@dataclass(frozen=True)
class ArchConfig:
    """Network shape. Defaults match the full-size 500-sample classifier."""

    input_len: int = 500
    conv_channels: tuple[int, ...] = (16, 32)
    kernel: int = 5
    pool: int = 4
    lstm_hidden: int = 4
    n_classes: int = 3
    leaky_slope: float = 0.01
    dropout: float = 0.3
    bn_momentum: float = 0.9
    bn_eps: float = 1e-5

    def shape_pipeline(self) -> list[tuple[str, tuple[int, ...]]]:
        """Per-stage output shapes (time, channels) for one input epoch."""
        stages = [("input", (self.input_len, 1))]
        length, ch = self.input_len, 1
        for i, c_out in enumerate(self.conv_channels, start=1):
            length = length // self.pool
            ch = c_out
            stages.append((f"cell{i}", (length, ch)))
        if length < 1:
            raise ValueError(
                f"pooling collapses the sequence to length {length}; "
                "input too short for this architecture"
            )
        stages.append(("lstm", (self.lstm_hidden,)))
        stages.append(("logits", (self.n_classes,)))
        return stages


@dataclass
class ModelParams:
    """Trainable weights plus batch-norm running statistics."""

    arch: ArchConfig
    weights: dict[str, np.ndarray]
    bn_stats: dict[str, np.ndarray]

    def copy(self) -> "ModelParams":
        return ModelParams(
            arch=self.arch,
            weights={k: v.copy() for k, v in self.weights.items()},
            bn_stats={k: v.copy() for k, v in self.bn_stats.items()},
        )


@dataclass(frozen=True)
class Hyperparams:
    learning_rate: float = 1e-4
    batch_size: int = 20
    dropout: float = 0.3
    leaky_slope: float = 0.01
    anneal_factor: float = 5.0
    early_stop_patience: int = 8
    max_epochs: int = 80
    seed: int = 42

    def __post_init__(self):
        if not 0.0 < self.dropout < 1.0:
            raise ValueError("dropout must lie in (0, 1)")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.anneal_factor <= 1:
            raise ValueError("anneal_factor must exceed 1")


@dataclass(frozen=True)
class ClassProbs:
    p_rest: float
    p_onset: float
    p_activation: float

    @classmethod
    def from_array(cls, probs: np.ndarray) -> "ClassProbs":
        return cls(float(probs[0]), float(probs[1]), float(probs[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.p_rest, self.p_onset, self.p_activation])

    @property
    def predicted(self) -> MuscleClass:
        return CLASS_ORDER[int(np.argmax(self.as_array()))]


def init_params(arch: ArchConfig, seed: int = 0, dtype=np.float64) -> ModelParams:
    """He-initialized convolutions, uniform LSTM, zero-init dense biases."""
    rng = np.random.default_rng(seed)
    weights: dict[str, np.ndarray] = {}
    stats: dict[str, np.ndarray] = {}
    c_in = 1
    for i, c_out in enumerate(arch.conv_channels, start=1):
        for tag, ci in (("a", c_in), ("b", c_out)):
            std = np.sqrt(2.0 / (arch.kernel * ci))
            weights[f"cell{i}_conv{tag}_w"] = rng.normal(
                0.0, std, (arch.kernel, ci, c_out)
            )
            weights[f"cell{i}_conv{tag}_b"] = np.zeros(c_out)
        weights[f"cell{i}_bn_gamma"] = np.ones(c_out)
        weights[f"cell{i}_bn_beta"] = np.zeros(c_out)
        stats[f"cell{i}_bn_mean"] = np.zeros(c_out)
        stats[f"cell{i}_bn_var"] = np.ones(c_out)
        c_in = c_out
    h = arch.lstm_hidden
    bound = 1.0 / np.sqrt(h)
    weights["lstm_wx"] = rng.uniform(-bound, bound, (c_in, 4 * h))
    weights["lstm_wh"] = rng.uniform(-bound, bound, (h, 4 * h))
    lstm_b = np.zeros(4 * h)
    lstm_b[h : 2 * h] = 1.0  # forget-gate bias
    weights["lstm_b"] = lstm_b
    weights["dense_w"] = rng.normal(0.0, np.sqrt(1.0 / h), (h, arch.n_classes))
    weights["dense_b"] = np.zeros(arch.n_classes)
    weights = {k: v.astype(dtype) for k, v in weights.items()}
    stats = {k: v.astype(dtype) for k, v in stats.items()}
    return ModelParams(arch=arch, weights=weights, bn_stats=stats)


def _check_input(x: np.ndarray, arch: ArchConfig, dtype) -> np.ndarray:
    x = np.asarray(x, dtype=dtype)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != arch.input_len:
        raise ValueError(
            f"input layer: epoch length {x.shape[1]} != expected {arch.input_len}"
        )
    return x


def forward_batch(model: ModelParams, x: np.ndarray, train: bool = False, rng=None):
    """Class probabilities for a batch of epochs; returns (probs, cache).

    Dropout is sampled from ``rng`` only when ``train`` is set. Batch-norm
    running statistics update in place during training.
    """
    arch = model.arch
    w, stats = model.weights, model.bn_stats
    x = _check_input(x, arch, w["dense_w"].dtype)
    if train and arch.dropout > 0 and rng is None:
        raise ValueError("training-mode forward needs an rng for dropout")
    h = x[:, :, None]
    cache = []
    for i in range(1, len(arch.conv_channels) + 1):
        h, c_a = layers.conv1d_forward(h, w[f"cell{i}_conva_w"], w[f"cell{i}_conva_b"])
        h, c_b = layers.conv1d_forward(h, w[f"cell{i}_convb_w"], w[f"cell{i}_convb_b"])
        h, c_bn = layers.batchnorm_forward(
            h,
            w[f"cell{i}_bn_gamma"],
            w[f"cell{i}_bn_beta"],
            stats[f"cell{i}_bn_mean"],
            stats[f"cell{i}_bn_var"],
            arch.bn_momentum,
            arch.bn_eps,
            train,
        )
        h, c_pool = layers.maxpool_forward(h, arch.pool)
        h, c_act = layers.leaky_relu_forward(h, arch.leaky_slope)
        cache.append((c_a, c_b, c_bn, c_pool, c_act))
    h, c_lstm = layers.lstm_forward(h, w["lstm_wx"], w["lstm_wh"], w["lstm_b"])
    h, c_drop = layers.dropout_forward(h, arch.dropout, rng, train)
    logits, c_dense = layers.dense_forward(h, w["dense_w"], w["dense_b"])
    probs = layers.softmax(logits)
    return probs, (cache, c_lstm, c_drop, c_dense, logits)


def forward(model: ModelParams, epoch_values, train: bool = False, rng=None) -> ClassProbs:
    """Single-epoch convenience wrapper around :func:`forward_batch`."""
    probs, _ = forward_batch(model, np.asarray(epoch_values), train=train, rng=rng)
    return ClassProbs.from_array(probs[0])


def predict(model: ModelParams, x: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Inference-mode class probabilities, shape (N, n_classes).

    Evaluates in chunks to bound the im2col working set.
    """
    x = np.asarray(x)
    if x.ndim == 1:
        x = x[None, :]
    out = []
    for lo in range(0, x.shape[0], chunk):
        probs, _ = forward_batch(model, x[lo : lo + chunk], train=False)
        out.append(probs)
    return np.concatenate(out, axis=0)


def loss_and_grads(model: ModelParams, x: np.ndarray, y: np.ndarray, rng=None):
    """Mean cross-entropy loss and gradients for every trainable tensor.

    Runs the network in training mode (batch statistics, dropout sampled from
    ``rng``); gradients are averaged over the batch.
    """
    x = np.asarray(x)
    y = np.asarray(y, dtype=int)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    arch = model.arch
    w = model.weights
    probs, (cell_caches, c_lstm, c_drop, c_dense, logits) = forward_batch(
        model, x, train=True, rng=rng
    )
    loss, dlogits, _ = layers.softmax_cross_entropy(logits, y)
    grads: dict[str, np.ndarray] = {}
    dh, grads["dense_w"], grads["dense_b"] = layers.dense_backward(
        dlogits, c_dense, w["dense_w"]
    )
    dh = layers.dropout_backward(dh, c_drop)
    dh, grads["lstm_wx"], grads["lstm_wh"], grads["lstm_b"] = layers.lstm_backward(
        dh, c_lstm
    )
    for i in range(len(arch.conv_channels), 0, -1):
        c_a, c_b, c_bn, c_pool, c_act = cell_caches[i - 1]
        dh = layers.leaky_relu_backward(dh, c_act)
        dh = layers.maxpool_backward(dh, c_pool)
        dh, grads[f"cell{i}_bn_gamma"], grads[f"cell{i}_bn_beta"] = (
            layers.batchnorm_backward(dh, c_bn)
        )
        dh, grads[f"cell{i}_convb_w"], grads[f"cell{i}_convb_b"] = (
            layers.conv1d_backward(dh, c_b, w[f"cell{i}_convb_w"])
        )
        dh, grads[f"cell{i}_conva_w"], grads[f"cell{i}_conva_b"] = (
            layers.conv1d_backward(dh, c_a, w[f"cell{i}_conva_w"])
        )
    return grads, float(loss)
