"""Skin-contact signal channel: contact area -> received strength -> touch state.

One wearer's bracelet drives a weak carrier into the skin; when the players'
hands are in contact the other bracelet picks it up, and the received strength
grows with the contact area of the hands. We model the received strength as a
saturating function of area with additive Gaussian pickup noise, quantize it
like a microcontroller ADC would, and classify it into three touch states
(none / gentle / strong) with hysteresis so the state does not flicker at the
band edges.

Everything here is pure: the classifier takes its previous state explicitly,
so callers own all state and replaying a strength trace replays the states.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from random import Random

DEFAULT_SATURATION_AREA_CM2 = 20.0


class TouchState(Enum):
    NO_TOUCH = "no_touch"
    GENTLE = "gentle"
    STRONG = "strong"


#: Ordering used when combining the two players' intents: contact only exists
#: at the level both sides commit to.
_TOUCH_LEVEL = {TouchState.NO_TOUCH: 0, TouchState.GENTLE: 1, TouchState.STRONG: 2}


def touch_level(state: TouchState) -> int:
    return _TOUCH_LEVEL[state]


@dataclass(frozen=True)
class ContactInput:
    """One hand-contact sample: area in cm^2 plus the pickup noise level."""

    contact_area: float
    noise_sigma: float = 0.0

    def __post_init__(self) -> None:
        if self.contact_area < 0:
            raise ValueError(f"contact_area must be >= 0, got {self.contact_area}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")


@dataclass(frozen=True)
class ClassifierConfig:
    """Hysteresis thresholds on normalized strength.

    Escalation uses the *_on values, de-escalation the *_off values; the bands
    must be ordered and non-overlapping.
    """

    gentle_on: float = 0.20
    gentle_off: float = 0.15
    strong_on: float = 0.60
    strong_off: float = 0.50

    def __post_init__(self) -> None:
        if not (0.0 < self.gentle_off < self.gentle_on < self.strong_off < self.strong_on <= 1.0):
            raise ValueError(
                "classifier thresholds must satisfy "
                "0 < gentle_off < gentle_on < strong_off < strong_on <= 1, got "
                f"gentle_off={self.gentle_off} gentle_on={self.gentle_on} "
                f"strong_off={self.strong_off} strong_on={self.strong_on}"
            )


@dataclass(frozen=True)
class ChannelConfig:
    """Signal-path parameters.

    The carrier fields describe the emulated analog front end and are carried
    as metadata only; nothing downstream computes with them.
    """

    saturation_area_cm2: float = DEFAULT_SATURATION_AREA_CM2
    noise_sigma: float = 0.02
    adc_bits: int = 10  # 0 disables quantization
    carrier_vpp: float = 3.3
    carrier_freq_mhz: float = 10.7

    def __post_init__(self) -> None:
        if self.saturation_area_cm2 <= 0:
            raise ValueError(f"saturation_area_cm2 must be > 0, got {self.saturation_area_cm2}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.adc_bits < 0 or self.adc_bits > 16:
            raise ValueError(f"adc_bits must be in 0..16, got {self.adc_bits}")


def signal_strength(
    contact: ContactInput,
    rng: Random | None = None,
    saturation_area_cm2: float = DEFAULT_SATURATION_AREA_CM2,
) -> float:
    """Received strength in [0, 1] for a contact sample.

    The noiseless law is a / (a + k) with k = saturation_area_cm2: zero at no
    contact, 0.5 at a = k, saturating toward (but never reaching) 1. Gaussian
    noise is added afterwards and the result clamped back into [0, 1].
    """
    if saturation_area_cm2 <= 0:
        raise ValueError(f"saturation_area_cm2 must be > 0, got {saturation_area_cm2}")
    a = contact.contact_area
    s = a / (a + saturation_area_cm2)
    if contact.noise_sigma > 0:
        if rng is None:
            raise ValueError("noise_sigma > 0 requires an rng")
        s += rng.gauss(0.0, contact.noise_sigma)
    return min(1.0, max(0.0, s))


def adc_quantize(strength: float, bits: int) -> float:
    """Snap a normalized strength onto an ADC grid of 2**bits levels."""
    if not 0.0 <= strength <= 1.0:
        raise ValueError(f"strength must be in [0, 1], got {strength}")
    if bits <= 0:
        return strength
    full_scale = (1 << bits) - 1
    return round(strength * full_scale) / full_scale


def measure(contact: ContactInput, cfg: ChannelConfig, rng: Random | None = None) -> float:
    """Full receiver-side measurement: saturation law, noise, ADC quantization."""
    s = signal_strength(contact, rng, cfg.saturation_area_cm2)
    return adc_quantize(s, cfg.adc_bits)


def classify(strength: float, previous: TouchState, cfg: ClassifierConfig) -> TouchState:
    """Map a strength reading to a touch state given the previous state.

    Rising transitions require crossing an *_on threshold, falling transitions
    happen below the matching *_off threshold, and a fall may skip straight to
    NO_TOUCH. Strength 0 always classifies as NO_TOUCH because gentle_off > 0.
    """
    if not 0.0 <= strength <= 1.0:
        raise ValueError(f"strength must be in [0, 1], got {strength}")
    if previous is TouchState.STRONG:
        if strength >= cfg.strong_off:
            return TouchState.STRONG
        if strength >= cfg.gentle_off:
            return TouchState.GENTLE
        return TouchState.NO_TOUCH
    if previous is TouchState.GENTLE:
        if strength >= cfg.strong_on:
            return TouchState.STRONG
        if strength >= cfg.gentle_off:
            return TouchState.GENTLE
        return TouchState.NO_TOUCH
    if strength >= cfg.strong_on:
        return TouchState.STRONG
    if strength >= cfg.gentle_on:
        return TouchState.GENTLE
    return TouchState.NO_TOUCH


def area_for_strength(strength: float, saturation_area_cm2: float = DEFAULT_SATURATION_AREA_CM2) -> float:
    """Invert the noiseless saturation law: the area that reads as `strength`."""
    if not 0.0 <= strength < 1.0:
        raise ValueError(f"strength must be in [0, 1) to invert, got {strength}")
    return saturation_area_cm2 * strength / (1.0 - strength)


def contact_area_for(level: TouchState, channel: ChannelConfig, classifier: ClassifierConfig) -> float:
    """Contact area that robustly classifies as `level` under the given configs.

    Targets the middle of each classification band so that default pickup
    noise and ADC quantization cannot push the reading across a threshold.
    """
    if level is TouchState.NO_TOUCH:
        return 0.0
    if level is TouchState.GENTLE:
        target = (classifier.gentle_on + classifier.strong_off) / 2.0
    else:
        target = (classifier.strong_on + 1.0) / 2.0
    return area_for_strength(target, channel.saturation_area_cm2)
