"""Versioned JSON checkpoints for the per-muscle classifier bundle.

Floats serialize via repr, so a load reproduces bit-identical inference.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..dsp import FilterSpec
from ..signals import Muscle
from .model import ArchConfig, Hyperparams, ModelParams

CHECKPOINT_VERSION = 1


def _encode_array(arr: np.ndarray) -> dict:
    return {"shape": list(arr.shape), "data": arr.ravel().tolist()}


def _decode_array(obj: dict) -> np.ndarray:
    return np.array(obj["data"], dtype=float).reshape(obj["shape"])


def save_checkpoint(
    path: str | Path,
    models: dict[Muscle, ModelParams],
    hyper: Hyperparams,
    filter_spec: FilterSpec = FilterSpec(),
    window_ms: float = 1000.0,
    stride_ms: float = 250.0,
) -> Path:
    payload = {
        "version": CHECKPOINT_VERSION,
        "hyperparams": asdict(hyper),
        "dsp": {
            "filter": asdict(filter_spec),
            "window_ms": window_ms,
            "stride_ms": stride_ms,
        },
        "models": {
            muscle.value: {
                "arch": asdict(params.arch),
                "dtype": str(params.weights["dense_w"].dtype),
                "weights": {k: _encode_array(v) for k, v in params.weights.items()},
                "bn_stats": {k: _encode_array(v) for k, v in params.bn_stats.items()},
            }
            for muscle, params in models.items()
        },
    }
    path = Path(path)
    path.write_text(json.dumps(payload))
    return path


def load_checkpoint(path: str | Path):
    """Returns (models, hyper, dsp_config_dict)."""
    payload = json.loads(Path(path).read_text())
    version = payload.get("version")
    if version != CHECKPOINT_VERSION:
        raise ValueError(
            f"unsupported checkpoint version {version!r}; expected {CHECKPOINT_VERSION}"
        )
    models = {}
    for muscle_name, entry in payload["models"].items():
        arch_d = dict(entry["arch"])
        arch_d["conv_channels"] = tuple(arch_d["conv_channels"])
        dtype = np.dtype(entry.get("dtype", "float64"))
        models[Muscle(muscle_name)] = ModelParams(
            arch=ArchConfig(**arch_d),
            weights={
                k: _decode_array(v).astype(dtype) for k, v in entry["weights"].items()
            },
            bn_stats={
                k: _decode_array(v).astype(dtype) for k, v in entry["bn_stats"].items()
            },
        )
    hyper = Hyperparams(**payload["hyperparams"])
    return models, hyper, payload["dsp"]
