"""JSON config loading: section-wise overrides onto the dataclass defaults.

A config file carries any subset of sections; omitted fields keep their
defaults. Example:

    {"dataset": {"reps": 10}, "latency": {"valve_response_ms": 40},
     "plant": {"cable_lever_mm": {"elbow": 45.0, "shoulder": 166.0}}}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .loop import LatencyConfig
from .net.model import Hyperparams
from .pam import PamConfig
from .plant import PlantConfig
from .signals import DatasetSpec


def _build(cls, overrides: dict):
    known = {f.name for f in fields(cls)}
    unknown = set(overrides) - known
    if unknown:
        raise ValueError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    converted = {}
    for key, value in overrides.items():
        if isinstance(value, list):
            value = tuple(tuple(v) if isinstance(v, list) else v for v in value)
        converted[key] = value
    return cls(**converted)


@dataclass
class SimConfig:
    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    hyper: Hyperparams = field(default_factory=Hyperparams)
    latency: LatencyConfig = field(default_factory=LatencyConfig)
    pam: PamConfig = field(default_factory=PamConfig)
    plant: PlantConfig = field(default_factory=PlantConfig)

    @classmethod
    def load(cls, path: str | Path | None = None, seed: int | None = None) -> "SimConfig":
        sections: dict = {}
        if path is not None:
            sections = json.loads(Path(path).read_text())
        cfg = cls(
            dataset=_build(DatasetSpec, sections.get("dataset", {})),
            hyper=_build(Hyperparams, sections.get("hyper", {})),
            latency=_build(LatencyConfig, sections.get("latency", {})),
            pam=_build(PamConfig, sections.get("pam", {})),
            plant=_build(PlantConfig, sections.get("plant", {})),
        )
        if seed is not None:
            cfg = cls(
                dataset=_build(
                    DatasetSpec, {**sections.get("dataset", {}), "seed": seed}
                ),
                hyper=_build(Hyperparams, {**sections.get("hyper", {}), "seed": seed}),
                latency=cfg.latency,
                pam=cfg.pam,
                plant=cfg.plant,
            )
        return cfg
