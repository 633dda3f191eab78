"""Two-wrist vibration rendering.

A normalized position p in [0, 1] (0 = left player's wrist, 1 = right) is
rendered as a pair of actuator amplitudes whose intensity ratio places a
single felt vibration between the wrists. `perceived_position` inverts the
rendering, which makes the rendering testable and gives scripted players the
same cue a human gets. Short fixed-duration pulses accompany each step of the
stage character.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

DEFAULT_GAIN = 0.9
DEFAULT_PULSE_MS = 60.0


@dataclass(frozen=True)
class PanLaw:
    """Amplitude panning law; exponent 1 is the linear law.

    Other exponents compress or expand intensity while preserving the
    ratio-derived position, which perceived_position recovers by applying
    the inverse exponent.
    """

    exponent: float = 1.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.exponent) or self.exponent <= 0:
            raise ValueError(f"exponent must be finite and > 0, got {self.exponent}")

    @classmethod
    def linear(cls) -> "PanLaw":
        return cls(1.0)

    @classmethod
    def power(cls, exponent: float) -> "PanLaw":
        return cls(exponent)

    @property
    def is_linear(self) -> bool:
        return self.exponent == 1.0


LINEAR = PanLaw(1.0)


@dataclass(frozen=True, slots=True)
class ActuatorPair:
    """Per-wrist normalized amplitudes; duration_ms > 0 marks a scheduled pulse."""

    left: float
    right: float
    duration_ms: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.left <= 1.0:
            raise ValueError(f"left amplitude must be in [0, 1], got {self.left}")
        if not 0.0 <= self.right <= 1.0:
            raise ValueError(f"right amplitude must be in [0, 1], got {self.right}")
        if self.duration_ms < 0:
            raise ValueError(f"duration_ms must be >= 0, got {self.duration_ms}")


@dataclass(frozen=True)
class HapticsConfig:
    law: PanLaw = LINEAR
    gain: float = DEFAULT_GAIN
    pulse_ms: float = DEFAULT_PULSE_MS

    def __post_init__(self) -> None:
        if not 0.0 < self.gain <= 1.0:
            raise ValueError(f"gain must be in (0, 1], got {self.gain}")
        if self.pulse_ms <= 0:
            raise ValueError(f"pulse_ms must be > 0, got {self.pulse_ms}")


def pan(p: float, gain: float = DEFAULT_GAIN, law: PanLaw = LINEAR) -> ActuatorPair:
    """Render position p as a left/right amplitude pair.

    Linear: (gain*(1-p), gain*p). Power with exponent e: (gain*(1-p)**e,
    gain*p**e). Both keep perceived_position(pan(p)) == p.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if not 0.0 <= gain <= 1.0:
        raise ValueError(f"gain must be in [0, 1], got {gain}")
    if law.is_linear:
        return ActuatorPair(left=gain * (1.0 - p), right=gain * p)
    e = law.exponent
    return ActuatorPair(left=gain * (1.0 - p) ** e, right=gain * p ** e)


def perceived_position(pair: ActuatorPair, law: PanLaw = LINEAR) -> float:
    """Where a pair of amplitudes is felt, in [0, 1]; inverse of pan up to gain."""
    left, right = pair.left, pair.right
    if left == 0.0 and right == 0.0:
        raise ValueError("perceived position is undefined for a silent pair")
    if not law.is_linear:
        inv = 1.0 / law.exponent
        left, right = left**inv, right**inv
    return right / (left + right)


def step_pulse(
    fox_column: int,
    stage_width: int,
    gain: float = DEFAULT_GAIN,
    law: PanLaw = LINEAR,
    duration_ms: float = DEFAULT_PULSE_MS,
) -> ActuatorPair:
    """Pulse for a character standing in `fox_column` of a `stage_width` grid.

    Columns map uniformly onto [0, 1]: leftmost column is all-left, rightmost
    all-right. One pulse per movement step; no movement, no pulse.
    """
    if stage_width < 2:
        raise ValueError(f"stage_width must be >= 2, got {stage_width}")
    if not 0 <= fox_column < stage_width:
        raise ValueError(f"fox_column must be in [0, {stage_width - 1}], got {fox_column}")
    if duration_ms <= 0:
        raise ValueError(f"duration_ms must be > 0, got {duration_ms}")
    p = fox_column / (stage_width - 1)
    base = pan(p, gain, law)
    return ActuatorPair(left=base.left, right=base.right, duration_ms=duration_ms)
