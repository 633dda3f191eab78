"""One emulated bracelet: buttons, wrist IMU, vibration envelope, LED.

A device is a value-type state machine. Each tick it decays the vibration
envelope and emits one telemetry frame; command frames addressed to it set the
envelope and LED. The receiver-role device additionally reports the measured
skin-channel strength in its telemetry; the transmitter never does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import IntFlag
from random import Random

from .protocol import (
    LRA_AMPLITUDE_MAX,
    PROTOCOL_VERSION,
    STRENGTH_SCALE,
    CommandFrame,
    DeviceRole,
    TelemetryFrame,
)

__all__ = [
    "Buttons",
    "DeviceRole",
    "DeviceState",
    "ImuNoise",
    "ImuReading",
    "WristPose",
    "apply_command",
    "device_tick",
    "imu_from_pose",
    "roll_from_accel",
]


class Buttons(IntFlag):
    NONE = 0
    DPAD_UP = 0x01
    DPAD_DOWN = 0x02
    DPAD_LEFT = 0x04
    DPAD_RIGHT = 0x08
    BUTTON_A = 0x10
    BUTTON_B = 0x20


@dataclass(frozen=True, slots=True)
class WristPose:
    """Forearm roll: supination positive, pronation negative."""

    roll_deg: float = 0.0
    roll_rate_dps: float = 0.0

    def __post_init__(self) -> None:
        if not -180.0 <= self.roll_deg <= 180.0:
            raise ValueError(f"roll_deg must be in [-180, 180], got {self.roll_deg}")


@dataclass(frozen=True, slots=True)
class ImuReading:
    accel_g: tuple[float, float, float]
    gyro_dps: tuple[float, float, float]


@dataclass(frozen=True)
class ImuNoise:
    accel_sigma_g: float = 0.01
    gyro_sigma_dps: float = 0.5


NOISELESS_IMU = ImuNoise(0.0, 0.0)


@dataclass(frozen=True, slots=True)
class DeviceState:
    role: DeviceRole
    device_id: int
    buttons: Buttons = Buttons.NONE
    pose: WristPose = WristPose()
    lra_amplitude: float = 0.0
    lra_remaining_ms: float = 0.0
    led: tuple[int, int, int] = (0, 0, 0)
    telemetry_seq: int = 0
    rejected_commands: int = 0


def imu_from_pose(pose: WristPose, rng: Random | None = None, noise: ImuNoise = NOISELESS_IMU) -> ImuReading:
    """Gravity rotated about the forearm axis, plus the roll rate on gyro x.

    At roll 0 the accelerometer reads (0, 0, 1) g; rolling to +90 deg moves
    gravity onto the y axis.
    """
    rad = math.radians(pose.roll_deg)
    ax, ay, az = 0.0, math.sin(rad), math.cos(rad)
    gx, gy, gz = pose.roll_rate_dps, 0.0, 0.0
    if rng is not None and (noise.accel_sigma_g > 0 or noise.gyro_sigma_dps > 0):
        gauss = rng.gauss
        sa, sg = noise.accel_sigma_g, noise.gyro_sigma_dps
        ax += gauss(0.0, sa)
        ay += gauss(0.0, sa)
        az += gauss(0.0, sa)
        gx += gauss(0.0, sg)
        gy += gauss(0.0, sg)
        gz += gauss(0.0, sg)
    return ImuReading(accel_g=(ax, ay, az), gyro_dps=(gx, gy, gz))


def roll_from_accel(accel_g: tuple[float, float, float]) -> float:
    """Recover the roll angle in degrees from a gravity reading."""
    return math.degrees(math.atan2(accel_g[1], accel_g[2]))


def _to_i16(value: float) -> int:
    n = round(value)
    if n > 32767:
        return 32767
    if n < -32768:
        return -32768
    return n


def device_tick(
    state: DeviceState,
    dt_ms: float,
    strength: float | None = None,
    rng: Random | None = None,
    noise: ImuNoise = NOISELESS_IMU,
    pose: WristPose | None = None,
) -> tuple[DeviceState, TelemetryFrame]:
    """Advance the device by dt_ms and emit one telemetry frame.

    `strength` is the skin-channel reading and must be supplied exactly when
    the device is the receiver; handing it to a transmitter is a wiring bug.
    `pose` lets the owner update the wrist pose in the same tick.
    """
    if state.role is DeviceRole.RECEIVER:
        if strength is None:
            raise ValueError("receiver tick requires a strength reading")
    elif strength is not None:
        raise ValueError("transmitter tick must not receive a strength reading")

    if pose is None:
        pose = state.pose
    remaining = state.lra_remaining_ms - dt_ms
    if remaining <= 0.0:
        remaining = 0.0
        amplitude = 0.0
    else:
        amplitude = state.lra_amplitude
    imu = imu_from_pose(pose, rng, noise)
    ax, ay, az = imu.accel_g
    gx, gy, gz = imu.gyro_dps
    clamp = _to_i16
    frame = TelemetryFrame(
        device_id=state.device_id,
        role=state.role,
        seq=state.telemetry_seq,
        buttons=int(state.buttons),
        accel_mg=(clamp(ax * 1000.0), clamp(ay * 1000.0), clamp(az * 1000.0)),
        gyro_ddps=(clamp(gx * 10.0), clamp(gy * 10.0), clamp(gz * 10.0)),
        strength_u16=None if strength is None else round(strength * STRENGTH_SCALE),
        version=PROTOCOL_VERSION,
    )
    new_state = DeviceState(
        role=state.role,
        device_id=state.device_id,
        buttons=state.buttons,
        pose=pose,
        lra_amplitude=amplitude,
        lra_remaining_ms=remaining,
        led=state.led,
        telemetry_seq=(state.telemetry_seq + 1) & 0xFFFF,
        rejected_commands=state.rejected_commands,
    )
    return new_state, frame


def apply_command(state: DeviceState, cmd: CommandFrame) -> DeviceState:
    """Apply a host command: set the vibration envelope and LED.

    Commands for another device id are ignored and counted. Identical
    commands are idempotent by construction.
    """
    if cmd.device_id != state.device_id:
        return replace(state, rejected_commands=state.rejected_commands + 1)
    amplitude = cmd.lra_amplitude / LRA_AMPLITUDE_MAX
    remaining = float(cmd.lra_duration_ms)
    if remaining == 0.0:
        amplitude = 0.0
    return replace(
        state,
        lra_amplitude=amplitude,
        lra_remaining_ms=remaining,
        led=cmd.led,
    )
