"""Pan law tests: endpoints, round-trip inversion, gain invariance, pulses."""

import math
from random import Random

import pytest

from handfox.haptics import LINEAR, ActuatorPair, HapticsConfig, PanLaw, pan, perceived_position, step_pulse

LAWS = (LINEAR, PanLaw.power(0.5), PanLaw.power(1.0), PanLaw.power(2.0))


class TestPan:
    def test_left_endpoint(self):
        pair = pan(0.0, 1.0, LINEAR)
        assert (pair.left, pair.right) == (1.0, 0.0)

    def test_right_endpoint(self):
        pair = pan(1.0, 1.0, LINEAR)
        assert (pair.left, pair.right) == (0.0, 1.0)

    def test_midpoint_equal_amplitudes(self):
        for law in LAWS:
            pair = pan(0.5, 0.8, law)
            assert pair.left == pair.right

    def test_quarter_linear(self):
        pair = pan(0.25, 1.0, LINEAR)
        assert (pair.left, pair.right) == (0.75, 0.25)

    def test_power_one_is_linear(self):
        rng = Random(3)
        for _ in range(200):
            p, g = rng.random(), rng.random()
            assert pan(p, g, PanLaw.power(1.0)) == pan(p, g, LINEAR)

    def test_monotone_in_position(self):
        rng = Random(4)
        for law in LAWS:
            ps = sorted(rng.random() for _ in range(300))
            pairs = [pan(p, 0.9, law) for p in ps]
            for (p1, a), (p2, b) in zip(zip(ps, pairs), zip(ps[1:], pairs[1:])):
                if p1 == p2:
                    continue
                assert a.right < b.right
                assert a.left > b.left

    def test_energy_bound(self):
        rng = Random(5)
        for law in LAWS:
            for _ in range(300):
                g = rng.random()
                pair = pan(rng.random(), g, law)
                assert pair.left <= g and pair.right <= g

    def test_linear_sum_is_gain(self):
        # Exact for binary-representable gains; within one ulp for arbitrary ones.
        rng = Random(6)
        for g in (1.0, 0.75, 0.5, 0.25):
            for _ in range(500):
                pair = pan(rng.random(), g, LINEAR)
                assert pair.left + pair.right == g
        for _ in range(2000):
            g, p = rng.random(), rng.random()
            pair = pan(p, g, LINEAR)
            assert abs(pair.left + pair.right - g) <= math.ulp(g)

    def test_range_validation(self):
        with pytest.raises(ValueError, match="p must"):
            pan(1.5, 1.0)
        with pytest.raises(ValueError, match="gain"):
            pan(0.5, 1.5)


class TestPerceivedPosition:
    def test_inverse_of_quarter(self):
        assert perceived_position(ActuatorPair(0.75, 0.25), LINEAR) == 0.25

    def test_equal_amplitudes_center(self):
        for x, g in ((0.3, 1.0), (0.1, 0.5), (0.9, 0.9)):
            assert perceived_position(ActuatorPair(g * x, g * x), LINEAR) == 0.5

    def test_round_trip_all_laws(self):
        rng = Random(7)
        for law in LAWS:
            for _ in range(1000):
                p, g = rng.random(), 0.05 + 0.95 * rng.random()
                assert abs(perceived_position(pan(p, g, law), law) - p) < 1e-12

    def test_endpoints_and_midpoint_exact(self):
        for law in LAWS:
            for g in (0.9, 0.75, 1.0):
                assert perceived_position(pan(0.0, g, law), law) == 0.0
                assert perceived_position(pan(1.0, g, law), law) == 1.0
                assert perceived_position(pan(0.5, g, law), law) == 0.5

    def test_gain_invariance(self):
        rng = Random(8)
        for law in LAWS:
            for _ in range(300):
                p = rng.random()
                a = perceived_position(pan(p, 0.2, law), law)
                b = perceived_position(pan(p, 0.9, law), law)
                assert abs(a - b) < 1e-12

    def test_silent_pair_rejected(self):
        with pytest.raises(ValueError, match="undefined"):
            perceived_position(ActuatorPair(0.0, 0.0))


class TestStepPulse:
    def test_leftmost_column(self):
        pulse = step_pulse(0, 9, gain=1.0)
        assert (pulse.left, pulse.right) == (1.0, 0.0)
        assert pulse.duration_ms == 60.0

    def test_rightmost_column(self):
        pulse = step_pulse(8, 9, gain=1.0)
        assert (pulse.left, pulse.right) == (0.0, 1.0)

    def test_center_column(self):
        pulse = step_pulse(4, 9, gain=0.8)
        assert pulse.left == pulse.right

    def test_grid_round_trip_exact_default_gain(self):
        # On the default 9-column stage every position is a multiple of 1/8,
        # and inversion at the default gain is bit-exact; the haptic-following
        # player and the localization metric rely on this.
        for width in (9, 5):
            for col in range(width):
                pulse = step_pulse(col, width)
                assert perceived_position(pulse, LINEAR) == col / (width - 1)

    def test_grid_round_trip_tight_other_widths(self):
        for width in (3, 7, 12, 17):
            for col in range(width):
                pulse = step_pulse(col, width)
                assert abs(perceived_position(pulse, LINEAR) - col / (width - 1)) < 1e-12

    def test_narrow_stage_rejected(self):
        with pytest.raises(ValueError, match="stage_width"):
            step_pulse(0, 1)

    def test_out_of_range_column_rejected(self):
        with pytest.raises(ValueError, match="fox_column"):
            step_pulse(9, 9)

    def test_config_validation(self):
        with pytest.raises(ValueError, match="gain"):
            HapticsConfig(gain=0.0)
        with pytest.raises(ValueError, match="pulse_ms"):
            HapticsConfig(pulse_ms=0.0)
        with pytest.raises(ValueError, match="exponent"):
            PanLaw(0.0)
