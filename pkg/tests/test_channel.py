"""Channel tests: saturation law, ADC quantization, hysteresis classifier."""

import math
from random import Random

import pytest

from handfox.channel import (
    ChannelConfig,
    ClassifierConfig,
    ContactInput,
    TouchState,
    adc_quantize,
    area_for_strength,
    classify,
    contact_area_for,
    measure,
    signal_strength,
)

CFG = ClassifierConfig()  # gentle 0.20/0.15, strong 0.60/0.50
STATES = (TouchState.NO_TOUCH, TouchState.GENTLE, TouchState.STRONG)


class TestSignalStrength:
    def test_zero_area_zero_noise_reads_zero(self):
        assert signal_strength(ContactInput(0.0, 0.0)) == 0.0

    def test_saturation_midpoint(self):
        k = 20.0
        assert signal_strength(ContactInput(k, 0.0), saturation_area_cm2=k) == 0.5

    def test_monotone_in_area(self):
        # Brute-force sweep: 1000 sampled ordered pairs, noiseless.
        rng = Random(101)
        for _ in range(1000):
            a1, a2 = sorted((rng.uniform(0, 200), rng.uniform(0, 200)))
            s1 = signal_strength(ContactInput(a1, 0.0))
            s2 = signal_strength(ContactInput(a2, 0.0))
            assert s1 <= s2

    def test_bounded_below_one(self):
        for area in (0.0, 1.0, 100.0, 1e6):
            s = signal_strength(ContactInput(area, 0.0))
            assert 0.0 <= s < 1.0

    def test_noise_is_seeded_and_clamped(self):
        a = ContactInput(10.0, 5.0)  # absurd sigma to force clamping
        values = [signal_strength(a, Random(7)) for _ in range(3)]
        assert values[0] == values[1] == values[2]
        rng = Random(3)
        for _ in range(200):
            assert 0.0 <= signal_strength(a, rng) <= 1.0

    def test_negative_area_rejected(self):
        with pytest.raises(ValueError, match="contact_area"):
            ContactInput(-1.0)

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError, match="noise_sigma"):
            ContactInput(1.0, -0.1)

    def test_noise_without_rng_rejected(self):
        with pytest.raises(ValueError, match="rng"):
            signal_strength(ContactInput(1.0, 0.1))


class TestAdcQuantize:
    def test_snaps_to_grid(self):
        full = (1 << 10) - 1
        rng = Random(5)
        for _ in range(500):
            q = adc_quantize(rng.random(), 10)
            assert q == round(q * full) / full

    def test_disabled_passthrough(self):
        assert adc_quantize(0.123456789, 0) == 0.123456789

    def test_endpoints_preserved(self):
        assert adc_quantize(0.0, 10) == 0.0
        assert adc_quantize(1.0, 10) == 1.0

    def test_measure_applies_config(self):
        cfg = ChannelConfig(noise_sigma=0.0, adc_bits=10)
        s = measure(ContactInput(13.0, 0.0), cfg)
        full = (1 << 10) - 1
        assert s == round((13.0 / 33.0) * full) / full


def _expected_state(strength: float, previous: TouchState, cfg: ClassifierConfig) -> TouchState:
    """Enumeration oracle: explicit band table, written independently of classify().

    Bands: [0, g_off) [g_off, g_on) [g_on, s_off) [s_off, s_on) [s_on, 1].
    """
    if strength < cfg.gentle_off:
        band = 0
    elif strength < cfg.gentle_on:
        band = 1
    elif strength < cfg.strong_off:
        band = 2
    elif strength < cfg.strong_on:
        band = 3
    else:
        band = 4
    table = {
        TouchState.NO_TOUCH: [TouchState.NO_TOUCH, TouchState.NO_TOUCH, TouchState.GENTLE,
                              TouchState.GENTLE, TouchState.STRONG],
        TouchState.GENTLE: [TouchState.NO_TOUCH, TouchState.GENTLE, TouchState.GENTLE,
                            TouchState.GENTLE, TouchState.STRONG],
        TouchState.STRONG: [TouchState.NO_TOUCH, TouchState.GENTLE, TouchState.GENTLE,
                            TouchState.STRONG, TouchState.STRONG],
    }
    return table[previous][band]


class TestClassifier:
    def test_zero_strength_always_no_touch(self):
        for previous in STATES:
            assert classify(0.0, previous, CFG) is TouchState.NO_TOUCH
        tight = ClassifierConfig(gentle_on=0.02, gentle_off=0.01, strong_on=0.9, strong_off=0.5)
        for previous in STATES:
            assert classify(0.0, previous, tight) is TouchState.NO_TOUCH

    def test_strong_from_cold(self):
        assert classify(0.70, TouchState.NO_TOUCH, CFG) is TouchState.STRONG

    def test_hysteresis_keeps_gentle_above_off(self):
        state = TouchState.NO_TOUCH
        seen = []
        for s in (0.25, 0.18, 0.18):
            state = classify(s, state, CFG)
            seen.append(state)
        assert seen == [TouchState.GENTLE, TouchState.GENTLE, TouchState.GENTLE]

    def test_matches_enumeration_oracle(self):
        # Every band boundary, midpoint and epsilon-offset, from every state.
        eps = 1e-9
        probes = sorted(
            {0.0, 1.0}
            | {v for t in (CFG.gentle_off, CFG.gentle_on, CFG.strong_off, CFG.strong_on)
               for v in (t - eps, t, t + eps)}
            | {0.075, 0.175, 0.35, 0.55, 0.8}
        )
        for previous in STATES:
            for s in probes:
                if 0.0 <= s <= 1.0:
                    assert classify(s, previous, CFG) is _expected_state(s, previous, CFG), (
                        previous, s
                    )

    def test_fixed_point_within_one_step(self):
        for previous in STATES:
            for i in range(101):
                s = i / 100
                once = classify(s, previous, CFG)
                assert classify(s, once, CFG) is once

    def test_replaying_a_trace_is_pure(self):
        rng = Random(42)
        trace = [rng.random() for _ in range(500)]

        def run():
            state = TouchState.NO_TOUCH
            out = []
            for s in trace:
                state = classify(s, state, CFG)
                out.append(state)
            return out

        assert run() == run()

    def test_threshold_ordering_enforced(self):
        with pytest.raises(ValueError, match="thresholds"):
            ClassifierConfig(gentle_on=0.1, gentle_off=0.2, strong_on=0.6, strong_off=0.5)
        with pytest.raises(ValueError, match="thresholds"):
            ClassifierConfig(gentle_on=0.55, gentle_off=0.5, strong_on=0.6, strong_off=0.52)

    def test_out_of_range_strength_rejected(self):
        with pytest.raises(ValueError, match="strength"):
            classify(1.5, TouchState.NO_TOUCH, CFG)


class TestAreaInversion:
    def test_round_trip(self):
        for s in (0.1, 0.35, 0.5, 0.8):
            area = area_for_strength(s)
            assert math.isclose(signal_strength(ContactInput(area, 0.0)), s, rel_tol=1e-12)

    def test_contact_targets_classify_robustly(self):
        channel = ChannelConfig()
        gentle_area = contact_area_for(TouchState.GENTLE, channel, CFG)
        strong_area = contact_area_for(TouchState.STRONG, channel, CFG)
        s_gentle = signal_strength(ContactInput(gentle_area, 0.0), saturation_area_cm2=channel.saturation_area_cm2)
        s_strong = signal_strength(ContactInput(strong_area, 0.0), saturation_area_cm2=channel.saturation_area_cm2)
        assert CFG.gentle_on < s_gentle < CFG.strong_off
        assert s_strong > CFG.strong_on
        assert contact_area_for(TouchState.NO_TOUCH, channel, CFG) == 0.0
