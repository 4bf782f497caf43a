"""Joint-level biomechanics surrogate for elbow and shoulder.

Torque demand combines two parts: gravitational torque of the arm segments,
scaled by a lift-cost factor calibrated so raising the arm matches the
120 N-at-the-hand requirement for an 80 kg body, plus the raw gravitational
torque of any hand-held load. Muscle effort is the assist-reduced residual
demand normalized by a per-joint maximum, clamped to [0, 1]; it drives the
synthetic EMG intensity so assisted-vs-unassisted comparisons fall out as
derived quantities.

The cable levers and stroke fractions are calibration constants (recorded in
the config, not hard-coded in formulas): they are tuned once so that 60 psi
assistance reproduces the reference no-load reduction ratios.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pam import PamConfig, max_contraction
from .signals import Muscle

G = 9.81  # m/s^2

JOINTS = ("elbow", "shoulder")
ANGLE_RANGE_DEG = {"elbow": (0.0, 150.0), "shoulder": (0.0, 170.0)}

# Agonist muscle per joint flexion (the channel whose EMG the comparisons track).
JOINT_AGONIST = {"elbow": Muscle.BICEPS, "shoulder": Muscle.MEDIAL_DELTOID}


@dataclass(frozen=True)
class JointState:
    joint: str
    angle_deg: float
    angular_velocity_dps: float = 0.0
    external_load_kg: float = 0.0

    def __post_init__(self):
        if self.joint not in JOINTS:
            raise ValueError(f"unknown joint {self.joint!r}")
        lo, hi = ANGLE_RANGE_DEG[self.joint]
        if not lo <= self.angle_deg <= hi:
            raise ValueError(
                f"{self.joint} angle {self.angle_deg} outside [{lo}, {hi}] deg"
            )
        if self.external_load_kg < 0:
            raise ValueError("external load must be non-negative")


@dataclass(frozen=True)
class PlantConfig:
    body_mass_kg: float = 80.0
    arm_lift_force_n: float = 120.0  # hand-equivalent force to raise the arm
    upper_arm_mass_frac: float = 0.05
    forearm_mass_frac: float = 0.03  # includes the hand
    upper_arm_len_m: float = 0.30
    forearm_len_m: float = 0.35
    # Effective transmission lever per joint (mm); calibration constants.
    cable_lever_mm: dict | None = None
    # Fraction of the free stroke consumed across the working range of motion.
    stroke_fraction: dict | None = None
    rom_deg: dict | None = None
    muscle_max_torque_nm: dict | None = None
    operating_psi: float = 60.0
    lift_cost: float | None = None  # derived from the 120 N anchor when None

    def __post_init__(self):
        if self.cable_lever_mm is None:
            object.__setattr__(self, "cable_lever_mm", {"elbow": 45.0, "shoulder": 166.0})
        if self.stroke_fraction is None:
            object.__setattr__(self, "stroke_fraction", {"elbow": 0.5, "shoulder": 0.5})
        if self.rom_deg is None:
            object.__setattr__(self, "rom_deg", {"elbow": 90.0, "shoulder": 90.0})
        if self.muscle_max_torque_nm is None:
            object.__setattr__(
                self, "muscle_max_torque_nm", {"elbow": 60.0, "shoulder": 150.0}
            )
        if self.lift_cost is None:
            # Calibrate so the shoulder at 90 deg demands exactly the
            # hand-equivalent lift force times the hand moment arm.
            raw = G * self._segment_moment_kgm("shoulder")
            target = self.arm_lift_force_n * self.hand_arm_m("shoulder")
            object.__setattr__(self, "lift_cost", target / raw)

    def _segment_moment_kgm(self, joint: str) -> float:
        m_u = self.upper_arm_mass_frac * self.body_mass_kg
        m_f = self.forearm_mass_frac * self.body_mass_kg
        if joint == "elbow":
            return m_f * self.forearm_len_m / 2.0
        return m_u * self.upper_arm_len_m / 2.0 + m_f * (
            self.upper_arm_len_m + self.forearm_len_m / 2.0
        )

    def hand_arm_m(self, joint: str) -> float:
        """Moment arm of a hand-held load about the joint (straight arm)."""
        if joint == "elbow":
            return self.forearm_len_m
        return self.upper_arm_len_m + self.forearm_len_m


def required_torque(state: JointState, cfg: PlantConfig = PlantConfig()) -> float:
    """Effective torque demand (Nm) to hold/move the joint at its angle.

    Segment gravity torque is scaled by the calibrated lift-cost factor;
    external loads enter at their raw gravitational torque.
    """
    sin_t = np.sin(np.deg2rad(state.angle_deg))
    seg = cfg.lift_cost * G * cfg._segment_moment_kgm(state.joint) * sin_t
    load = state.external_load_kg * G * cfg.hand_arm_m(state.joint) * sin_t
    return float(seg + load)


def assist_torque(
    pam_force_n: float, joint: str, cfg: PlantConfig = PlantConfig()
) -> float:
    """PAM cable tension times the joint's transmission lever."""
    if joint not in JOINTS:
        raise ValueError(f"no PAM mapped to joint {joint!r}")
    return pam_force_n * cfg.cable_lever_mm[joint] / 1000.0


def muscle_effort(
    required_nm: float, assist_nm: float, joint: str, cfg: PlantConfig = PlantConfig()
) -> float:
    """Residual activation in [0, 1]: assist-reduced demand over muscle max."""
    if required_nm < 0:
        raise ValueError("required torque must be non-negative")
    residual = max(0.0, required_nm - assist_nm)
    return float(np.clip(residual / cfg.muscle_max_torque_nm[joint], 0.0, 1.0))


def pam_contraction_for_angle(
    joint: str,
    angle_deg: float,
    cfg: PlantConfig = PlantConfig(),
    pam_cfg: PamConfig = PamConfig(),
) -> float:
    """Cable take-up (mm) at a joint angle under the geared transmission.

    The transmission is sized so the working range of motion consumes
    ``stroke_fraction`` of the free stroke at operating pressure.
    """
    span = cfg.stroke_fraction[joint] * max_contraction(cfg.operating_psi, pam_cfg)
    return float(span * np.clip(angle_deg / cfg.rom_deg[joint], 0.0, 1.5))
