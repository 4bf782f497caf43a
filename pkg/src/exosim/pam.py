"""Pneumatic artificial muscle model.

Quasistatic force law anchored to the measured 80 psi datum (897 N blocked
force, 87 mm free contraction), with blocked force and free contraction both
proportional to pressure. Fill/vent dynamics are first order through the
solenoid valves; a relief valve caps pressure at 70 psi. Contraction tracks
the quasistatic load equilibrium after a transport delay.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

RELIEF_PSI = 70.0  # mechanical relief valve
AUTO_LIMIT_PSI = 60.0  # operating envelope in automatic mode


@dataclass(frozen=True)
class PamConfig:
    f_max_ref: float = 897.0  # N at p_ref
    p_ref: float = 80.0  # psi characterization datum
    x_max_ref: float = 87.0  # mm at p_ref
    bladder_length_mm: float = 340.0
    mass_g: float = 104.0
    fill_time_constant_ms: float = 200.0
    vent_time_constant_ms: float = 150.0
    actuation_delay_ms: float = 100.0

    def __post_init__(self):
        for name in (
            "f_max_ref",
            "p_ref",
            "x_max_ref",
            "bladder_length_mm",
            "mass_g",
            "fill_time_constant_ms",
            "vent_time_constant_ms",
            "actuation_delay_ms",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


VALVE_STATES = ("fill", "vent", "closed")


@dataclass
class PamState:
    """Snapshot of one actuator; copyable value for telemetry."""

    pressure: float = 0.0  # psi
    contraction: float = 0.0  # mm, 0 = fully extended
    force: float = 0.0  # N
    valve: str = "closed"
    # Pressure as seen by the mechanics (actuation transport delay applied)
    delayed_pressure: float = 0.0
    # (ms until effective, pressure) samples still in transit
    delay_queue: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.valve not in VALVE_STATES:
            raise ValueError(f"unknown valve state {self.valve!r}")


def max_contraction(pressure: float, cfg: PamConfig = PamConfig()) -> float:
    """Free contraction (mm) at the given pressure; linear in pressure."""
    if pressure < 0:
        raise ValueError("pressure must be non-negative")
    return cfg.x_max_ref * pressure / cfg.p_ref


def static_force(
    pressure: float, contraction: float, cfg: PamConfig = PamConfig()
) -> float:
    """Quasistatic tension (N) at a pressure/contraction operating point.

    F = F0(p) * (1 - x / x_max(p)) with F0 and x_max proportional to
    pressure. Pressures up to the characterization datum (80 psi) are
    accepted; operational trajectories stay below the 70 psi relief cap.
    """
    if not 0.0 <= pressure <= cfg.p_ref:
        raise ValueError(f"pressure {pressure} psi outside [0, {cfg.p_ref}]")
    if contraction < 0:
        raise ValueError("contraction must be non-negative")
    x_max = max_contraction(pressure, cfg)
    if contraction > x_max + 1e-9:
        raise ValueError(
            f"over-contraction: {contraction} mm exceeds x_max({pressure} psi)"
            f" = {x_max:.3f} mm"
        )
    if x_max == 0.0:
        return 0.0
    f0 = cfg.f_max_ref * pressure / cfg.p_ref
    return f0 * (1.0 - contraction / x_max)


def tension_at(pressure: float, contraction: float, cfg: PamConfig = PamConfig()) -> float:
    """Like :func:`static_force` but slack (zero) beyond the stroke limit."""
    if pressure <= 0:
        return 0.0
    if contraction >= max_contraction(pressure, cfg):
        return 0.0
    return static_force(pressure, contraction, cfg)


def equilibrium_contraction(
    pressure: float, load_n: float, cfg: PamConfig = PamConfig()
) -> float:
    """Contraction (mm) where PAM tension balances the cable load."""
    if pressure <= 0:
        return 0.0
    f0 = cfg.f_max_ref * pressure / cfg.p_ref
    x_max = max_contraction(pressure, cfg)
    if load_n >= f0:
        return 0.0  # load exceeds blocked force; no contraction
    return float(np.clip(x_max * (1.0 - load_n / f0), 0.0, x_max))


def update(
    state: PamState,
    valve_cmd: str,
    supply_psi: float,
    dt_ms: float,
    cfg: PamConfig = PamConfig(),
    load_n: float = 0.0,
    target_psi: float | None = None,
) -> PamState:
    """Advance the actuator by ``dt_ms`` under a valve command.

    Pressure relaxes first-order toward the supply (fill) or zero (vent) and
    is clamped by the relief valve. A fill aimed at ``target_psi`` closes the
    valve at the target instead of overshooting (solenoid duty modeling).
    Contraction follows the load equilibrium for the pressure seen
    ``actuation_delay_ms`` ago.
    """
    if dt_ms <= 0:
        raise ValueError("dt_ms must be positive")
    if valve_cmd not in VALVE_STATES:
        raise ValueError(f"unknown valve command {valve_cmd!r}")

    p = state.pressure
    if valve_cmd == "fill":
        alpha = 1.0 - np.exp(-dt_ms / cfg.fill_time_constant_ms)
        p = p + (supply_psi - p) * alpha
        if target_psi is not None:
            p = min(p, target_psi)
    elif valve_cmd == "vent":
        alpha = 1.0 - np.exp(-dt_ms / cfg.vent_time_constant_ms)
        p = p - p * alpha
        if target_psi is not None:
            p = max(p, target_psi)
    p = float(np.clip(p, 0.0, RELIEF_PSI))

    # Age the delay queue; the newest sample enters at the full delay. The
    # queue is time-ordered, so the last expired sample wins.
    queue = [(t - dt_ms, pv) for t, pv in state.delay_queue]
    queue.append((cfg.actuation_delay_ms - dt_ms, p))
    effective = state.delayed_pressure
    remaining = []
    for t, pv in queue:
        if t <= 0:
            effective = pv
        else:
            remaining.append((t, pv))

    contraction = equilibrium_contraction(effective, load_n, cfg)
    force = tension_at(effective, contraction, cfg) if contraction > 0 else min(
        load_n, tension_at(effective, 0.0, cfg)
    )
    return PamState(
        pressure=p,
        contraction=contraction,
        force=force,
        valve=valve_cmd,
        delayed_pressure=effective,
        delay_queue=tuple(remaining),
    )


def characterize(
    cfg: PamConfig = PamConfig(),
    pressures_psi: tuple[float, ...] = (10, 20, 30, 40, 50, 60, 70, 80),
    points: int = 50,
) -> dict[float, list[tuple[float, float]]]:
    """Force/contraction sweep per pressure, emulating a quasistatic test rig.

    For each pressure the muscle is swept from blocked (x = 0) to free
    contraction; returns {pressure: [(contraction_mm, force_n), ...]}.
    """
    curves = {}
    for p in pressures_psi:
        x_max = max_contraction(p, cfg)
        xs = np.linspace(0.0, x_max, points)
        curves[float(p)] = [(float(x), static_force(p, x, cfg)) for x in xs]
    return curves


def characterize_csv(
    path: str | Path,
    cfg: PamConfig = PamConfig(),
    pressures_psi: tuple[float, ...] = (10, 20, 30, 40, 50, 60, 70, 80),
    points: int = 50,
) -> Path:
    """Write the characterization sweep as pressure_psi,contraction_mm,force_n."""
    curves = characterize(cfg, pressures_psi, points)
    path = Path(path)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["pressure_psi", "contraction_mm", "force_n"])
        for p, curve in curves.items():
            for x, force in curve:
                writer.writerow([f"{p:g}", f"{x:.6f}", f"{force:.6f}"])
    return path
