"""Discrete PI speed controller in position-algorithm form.

Per sample: P = Kp * e, I = Ki * I_sum, DRIVE = clamp(P + I, drive range);
the error is accumulated after the output is formed, and the accumulator is
clamped symmetrically at I_thres. The default I_thres lets the integral
term alone just reach actuator saturation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

KP = 1.69
KI = 0.1488


def _default_ithres():
    return 255.0 / KI


@dataclass
class PiConfig:
    k_p: float = KP
    k_i: float = KI
    i_thres: float = field(default_factory=_default_ithres)
    drive_min: float = 0.0
    drive_max: float = 255.0

    def __post_init__(self):
        if self.drive_min >= self.drive_max:
            raise ValueError("drive_min must be below drive_max")
        if self.i_thres <= 0:
            raise ValueError("integral clamp must be positive")


@dataclass
class PiState:
    i_sum: float = 0.0
    last_drive: float = 0.0


def pi_step(cfg, state, e2):
    """One position-algorithm update; returns the saturated drive."""
    p = e2 * cfg.k_p
    i = state.i_sum * cfg.k_i
    drive = min(max(p + i, cfg.drive_min), cfg.drive_max)
    state.i_sum = min(max(state.i_sum + e2, -cfg.i_thres), cfg.i_thres)
    state.last_drive = drive
    return drive


def duty_ratio(drive):
    """Map a drive code to PWM duty percent (100% = 5 V at the bridge)."""
    if not 0.0 <= drive <= 255.0:
        raise ValueError("drive out of the 8-bit actuator range")
    return 100.0 * drive / 255.0
