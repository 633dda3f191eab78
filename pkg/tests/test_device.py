"""Bracelet emulation tests: IMU model, tick/telemetry, command handling."""

import math
from random import Random

import pytest

from handfox.device import (
    Buttons,
    DeviceState,
    ImuNoise,
    WristPose,
    apply_command,
    device_tick,
    imu_from_pose,
    roll_from_accel,
)
from handfox.protocol import CommandFrame, DeviceRole


def make_device(role=DeviceRole.RECEIVER, **kw):
    return DeviceState(role=role, device_id=2 if role is DeviceRole.RECEIVER else 1, **kw)


class TestImu:
    def test_rest_pose(self):
        imu = imu_from_pose(WristPose(0.0, 0.0))
        assert imu.accel_g == (0.0, 0.0, 1.0)
        assert imu.gyro_dps == (0.0, 0.0, 0.0)

    def test_quarter_turn(self):
        imu = imu_from_pose(WristPose(90.0, 0.0))
        assert imu.accel_g[1] == pytest.approx(1.0, abs=1e-12)
        assert imu.accel_g[2] == pytest.approx(0.0, abs=1e-12)

    def test_gravity_magnitude_at_rest(self):
        for roll in (-170.0, -45.0, 10.0, 133.7):
            ax, ay, az = imu_from_pose(WristPose(roll, 0.0)).accel_g
            assert math.sqrt(ax * ax + ay * ay + az * az) == pytest.approx(1.0, abs=1e-12)

    def test_roll_round_trip(self):
        # Inverse-trig oracle: noiseless accel back through atan2.
        rng = Random(11)
        for _ in range(100):
            roll = rng.uniform(-89.9, 89.9)
            imu = imu_from_pose(WristPose(roll, 0.0))
            assert roll_from_accel(imu.accel_g) == pytest.approx(roll, abs=1e-9)

    def test_gyro_carries_roll_rate(self):
        imu = imu_from_pose(WristPose(10.0, 123.0))
        assert imu.gyro_dps[0] == 123.0

    def test_noise_is_seeded(self):
        noise = ImuNoise(accel_sigma_g=0.01, gyro_sigma_dps=0.5)
        a = imu_from_pose(WristPose(30.0), Random(5), noise)
        b = imu_from_pose(WristPose(30.0), Random(5), noise)
        assert a == b
        c = imu_from_pose(WristPose(30.0), Random(6), noise)
        assert a != c

    def test_pose_range_enforced(self):
        with pytest.raises(ValueError, match="roll_deg"):
            WristPose(181.0)


class TestDeviceTick:
    def test_receiver_frame_carries_strength(self):
        _, frame = device_tick(make_device(), 16.67, strength=0.4)
        assert frame.strength_u16 == round(0.4 * 65535)

    def test_transmitter_frame_has_no_strength(self):
        _, frame = device_tick(make_device(DeviceRole.TRANSMITTER), 16.67)
        assert frame.strength_u16 is None

    def test_transmitter_rejects_strength(self):
        with pytest.raises(ValueError, match="transmitter"):
            device_tick(make_device(DeviceRole.TRANSMITTER), 16.67, strength=0.2)

    def test_receiver_requires_strength(self):
        with pytest.raises(ValueError, match="receiver"):
            device_tick(make_device(), 16.67)

    def test_envelope_expires_within_tick(self):
        dev = make_device(lra_amplitude=0.75, lra_remaining_ms=10.0)
        dev, _ = device_tick(dev, 16.0, strength=0.0)
        assert dev.lra_amplitude == 0.0
        assert dev.lra_remaining_ms == 0.0

    def test_envelope_survives_partial_tick(self):
        dev = make_device(lra_amplitude=0.75, lra_remaining_ms=40.0)
        dev, _ = device_tick(dev, 16.0, strength=0.0)
        assert dev.lra_amplitude == 0.75
        assert dev.lra_remaining_ms == 24.0

    def test_seq_increments_by_one_and_wraps(self):
        dev = make_device()
        for expected in range(3):
            dev, frame = device_tick(dev, 16.67, strength=0.0)
            assert frame.seq == expected
        dev = make_device(telemetry_seq=0xFFFF)
        dev, frame = device_tick(dev, 16.67, strength=0.0)
        assert frame.seq == 0xFFFF
        assert dev.telemetry_seq == 0

    def test_buttons_and_pose_reach_telemetry(self):
        dev = make_device(
            buttons=Buttons.DPAD_LEFT | Buttons.BUTTON_A,
            pose=WristPose(90.0, 100.0),
        )
        _, frame = device_tick(dev, 16.67, strength=0.0)
        assert frame.buttons == int(Buttons.DPAD_LEFT | Buttons.BUTTON_A)
        assert frame.accel_mg == (0, 1000, 0)
        assert frame.gyro_ddps == (1000, 0, 0)

    def test_fuzzed_transmitter_frames_never_carry_strength(self):
        from dataclasses import replace

        rng = Random(77)
        tx = make_device(DeviceRole.TRANSMITTER)
        rx = make_device(DeviceRole.RECEIVER)
        for _ in range(300):
            tx = replace(tx, pose=WristPose(rng.uniform(-180, 180)))
            tx, tf = device_tick(tx, 16.67, rng=rng, noise=ImuNoise())
            rx, rf = device_tick(rx, 16.67, strength=rng.random(), rng=rng, noise=ImuNoise())
            assert tf.strength_u16 is None
            assert rf.strength_u16 is not None


class TestApplyCommand:
    def test_sets_envelope_and_led(self):
        dev = make_device()
        cmd = CommandFrame(device_id=2, seq=0, lra_amplitude=95, lra_duration_ms=40, led=(10, 20, 30))
        dev = apply_command(dev, cmd)
        assert dev.lra_amplitude == 95 / 127
        assert dev.lra_remaining_ms == 40.0
        assert dev.led == (10, 20, 30)

    def test_zero_command_stops_vibration(self):
        dev = make_device(lra_amplitude=0.9, lra_remaining_ms=100.0)
        dev = apply_command(dev, CommandFrame(device_id=2, seq=1))
        assert dev.lra_amplitude == 0.0
        assert dev.lra_remaining_ms == 0.0

    def test_zero_duration_zeroes_amplitude(self):
        dev = apply_command(
            make_device(), CommandFrame(device_id=2, seq=0, lra_amplitude=64, lra_duration_ms=0)
        )
        assert dev.lra_amplitude == 0.0

    def test_idempotent(self):
        cmd = CommandFrame(device_id=2, seq=3, lra_amplitude=50, lra_duration_ms=60)
        once = apply_command(make_device(), cmd)
        twice = apply_command(once, cmd)
        assert once == twice

    def test_wrong_address_ignored_and_counted(self):
        dev = make_device()
        cmd = CommandFrame(device_id=9, seq=0, lra_amplitude=50, lra_duration_ms=60)
        dev2 = apply_command(dev, cmd)
        assert dev2.lra_amplitude == dev.lra_amplitude
        assert dev2.rejected_commands == 1


class TestEnvelopeConservation:
    def test_integral_matches_command_accounting(self):
        """Event-log accounting: total emitted amplitude-time equals the sum of
        commanded amplitude*duration minus what superseding commands truncate."""
        dt = 1000.0 / 60.0
        schedule = {  # tick -> command
            0: CommandFrame(device_id=2, seq=0, lra_amplitude=95, lra_duration_ms=40),
            5: CommandFrame(device_id=2, seq=1, lra_amplitude=63, lra_duration_ms=100),
            7: CommandFrame(device_id=2, seq=2, lra_amplitude=127, lra_duration_ms=30),
            30: CommandFrame(device_id=2, seq=3, lra_amplitude=40, lra_duration_ms=25),
        }
        dev = make_device()
        commanded = 0.0
        truncated = 0.0
        integral = 0.0
        for tick in range(80):
            if tick in schedule:
                cmd = schedule[tick]
                if dev.lra_remaining_ms > 0:
                    truncated += dev.lra_amplitude * dev.lra_remaining_ms
                commanded += (cmd.lra_amplitude / 127) * cmd.lra_duration_ms
                dev = apply_command(dev, cmd)
            active = min(dt, dev.lra_remaining_ms)
            integral += dev.lra_amplitude * active
            dev, _ = device_tick(dev, dt, strength=0.0)
        assert integral == pytest.approx(commanded - truncated, abs=1e-9)
