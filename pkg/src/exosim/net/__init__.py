"""From-scratch CNN+LSTM intent classifier: layers, model, optimizer, training."""

from .model import ArchConfig, ClassProbs, Hyperparams, ModelParams, forward, init_params
from .optim import AdamState, adam_step
from .training import ConfusionMatrix, evaluate, train, train_all_muscles

__all__ = [
    "ArchConfig",
    "ClassProbs",
    "Hyperparams",
    "ModelParams",
    "forward",
    "init_params",
    "AdamState",
    "adam_step",
    "ConfusionMatrix",
    "evaluate",
    "train",
    "train_all_muscles",
]
