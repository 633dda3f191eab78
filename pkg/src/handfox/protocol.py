"""Wire codec for bracelet <-> host frames, plus a lossy link emulator.

Both frame families share a fixed little-endian layout framed by a magic byte
and protected by CRC-16/CCITT-FALSE computed over everything before the CRC:

    telemetry, device -> host (22 bytes, 24 when strength is present)::

        A7 01 | version:u8 device_id:u8 role:u8 | seq:u16 | buttons:u8
        | accel:3*i16 (milli-g) | gyro:3*i16 (0.1 deg/s)
        | strength:u16 (x65535, receiver role only) | crc:u16

    command, host -> device (14 bytes)::

        A7 02 | version:u8 device_id:u8 | seq:u16 | lra_amplitude:u8 (0..127)
        | lra_duration:u16 (ms) | led:3*u8 | crc:u16

Field encodings are fixed-point integers so frames are byte-exact across
platforms. Decoding is total: any byte sequence either yields exactly the
frame that produced it or raises a DecodeError subclass; corrupt input never
yields a silently wrong frame.

The Transport class emulates the radio link: per-message sampled latency,
random drops, and FIFO delivery per link even when sampled latencies would
reorder messages.
"""

from __future__ import annotations

import struct
from collections import deque
from dataclasses import dataclass
from enum import Enum
from random import Random

MAGIC = 0xA7
TYPE_TELEMETRY = 0x01
TYPE_COMMAND = 0x02
PROTOCOL_VERSION = 1

LRA_AMPLITUDE_MAX = 127  # 7-bit playback register
STRENGTH_SCALE = 65535

_TELEMETRY_BASE = struct.Struct("<5BHB6h")  # magic..gyro
_STRENGTH = struct.Struct("<H")
_COMMAND_BASE = struct.Struct("<4BHBH3B")
_CRC = struct.Struct("<H")

TELEMETRY_LEN = _TELEMETRY_BASE.size + _CRC.size  # 22
TELEMETRY_LEN_WITH_STRENGTH = TELEMETRY_LEN + _STRENGTH.size  # 24
COMMAND_LEN = _COMMAND_BASE.size + _CRC.size  # 14


class DeviceRole(Enum):
    TRANSMITTER = "transmitter"
    RECEIVER = "receiver"


_ROLE_TO_BYTE = {DeviceRole.TRANSMITTER: 0, DeviceRole.RECEIVER: 1}
_BYTE_TO_ROLE = {0: DeviceRole.TRANSMITTER, 1: DeviceRole.RECEIVER}


class DecodeError(ValueError):
    """Base class for all frame decode failures."""


class TruncatedFrame(DecodeError):
    pass


class TrailingBytes(DecodeError):
    pass


class BadMagic(DecodeError):
    pass


class BadFrameType(DecodeError):
    pass


class BadChecksum(DecodeError):
    pass


class UnknownVersion(DecodeError):
    pass


class InvalidFieldValue(DecodeError):
    pass


_CRC_TABLE = []
for _byte in range(256):
    _crc = _byte << 8
    for _ in range(8):
        _crc = ((_crc << 1) ^ 0x1021) & 0xFFFF if _crc & 0x8000 else (_crc << 1) & 0xFFFF
    _CRC_TABLE.append(_crc)


def crc16_ccitt(data: bytes) -> int:
    """CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection or xorout."""
    crc = 0xFFFF
    table = _CRC_TABLE
    for b in data:
        crc = ((crc << 8) & 0xFFFF) ^ table[(crc >> 8) ^ b]
    return crc


def _check_u8(name: str, value: int) -> None:
    if not 0 <= value <= 0xFF:
        raise InvalidFieldValue(f"{name} must fit in u8, got {value}")


def _check_u16(name: str, value: int) -> None:
    if not 0 <= value <= 0xFFFF:
        raise InvalidFieldValue(f"{name} must fit in u16, got {value}")


def _check_i16_triple(name: str, triple: tuple[int, int, int]) -> None:
    if len(triple) != 3:
        raise InvalidFieldValue(f"{name} must have 3 components, got {len(triple)}")
    a, b, c = triple
    if not (-32768 <= a <= 32767 and -32768 <= b <= 32767 and -32768 <= c <= 32767):
        raise InvalidFieldValue(f"{name} component must fit in i16, got {triple}")


@dataclass(frozen=True, slots=True)
class TelemetryFrame:
    device_id: int
    role: DeviceRole
    seq: int
    buttons: int = 0
    accel_mg: tuple[int, int, int] = (0, 0, 0)
    gyro_ddps: tuple[int, int, int] = (0, 0, 0)  # tenths of deg/s
    strength_u16: int | None = None
    version: int = PROTOCOL_VERSION

    def __post_init__(self) -> None:
        if not (0 <= self.version <= 0xFF and 0 <= self.device_id <= 0xFF and 0 <= self.seq <= 0xFFFF):
            raise InvalidFieldValue(
                f"version/device_id/seq out of range: {self.version}/{self.device_id}/{self.seq}"
            )
        if not 0 <= self.buttons <= 0x3F:
            raise InvalidFieldValue(f"buttons must fit in 6 bits, got {self.buttons}")
        _check_i16_triple("accel_mg", self.accel_mg)
        _check_i16_triple("gyro_ddps", self.gyro_ddps)
        if self.role is DeviceRole.RECEIVER:
            if self.strength_u16 is None:
                raise InvalidFieldValue("receiver telemetry must carry strength")
            _check_u16("strength_u16", self.strength_u16)
        elif self.strength_u16 is not None:
            raise InvalidFieldValue("transmitter telemetry must not carry strength")


@dataclass(frozen=True, slots=True)
class CommandFrame:
    device_id: int
    seq: int
    lra_amplitude: int = 0  # 7-bit
    lra_duration_ms: int = 0
    led: tuple[int, int, int] = (0, 0, 0)
    version: int = PROTOCOL_VERSION

    def __post_init__(self) -> None:
        _check_u8("version", self.version)
        _check_u8("device_id", self.device_id)
        _check_u16("seq", self.seq)
        if not 0 <= self.lra_amplitude <= LRA_AMPLITUDE_MAX:
            raise InvalidFieldValue(f"lra_amplitude must be 0..127, got {self.lra_amplitude}")
        _check_u16("lra_duration_ms", self.lra_duration_ms)
        if len(self.led) != 3:
            raise InvalidFieldValue(f"led must have 3 components, got {len(self.led)}")
        for v in self.led:
            _check_u8("led component", v)


def encode_telemetry(frame: TelemetryFrame) -> bytes:
    body = _TELEMETRY_BASE.pack(
        MAGIC,
        TYPE_TELEMETRY,
        frame.version,
        frame.device_id,
        _ROLE_TO_BYTE[frame.role],
        frame.seq,
        frame.buttons,
        *frame.accel_mg,
        *frame.gyro_ddps,
    )
    if frame.strength_u16 is not None:
        body += _STRENGTH.pack(frame.strength_u16)
    return body + _CRC.pack(crc16_ccitt(body))


def encode_command(frame: CommandFrame) -> bytes:
    body = _COMMAND_BASE.pack(
        MAGIC,
        TYPE_COMMAND,
        frame.version,
        frame.device_id,
        frame.seq,
        frame.lra_amplitude,
        frame.lra_duration_ms,
        *frame.led,
    )
    return body + _CRC.pack(crc16_ccitt(body))


def _check_envelope(data: bytes, expected_type: int, expected_len: int) -> None:
    if len(data) < expected_len:
        raise TruncatedFrame(f"need {expected_len} bytes, got {len(data)}")
    if len(data) > expected_len:
        raise TrailingBytes(f"expected {expected_len} bytes, got {len(data)}")
    if data[0] != MAGIC:
        raise BadMagic(f"expected magic 0x{MAGIC:02X}, got 0x{data[0]:02X}")
    if data[1] != expected_type:
        raise BadFrameType(f"expected type 0x{expected_type:02X}, got 0x{data[1]:02X}")
    (stored,) = _CRC.unpack_from(data, len(data) - 2)
    actual = crc16_ccitt(data[:-2])
    if stored != actual:
        raise BadChecksum(f"crc mismatch: stored 0x{stored:04X}, computed 0x{actual:04X}")


def decode_telemetry(data: bytes) -> TelemetryFrame:
    if len(data) < TELEMETRY_LEN:
        raise TruncatedFrame(f"need at least {TELEMETRY_LEN} bytes, got {len(data)}")
    if data[0] != MAGIC:
        raise BadMagic(f"expected magic 0x{MAGIC:02X}, got 0x{data[0]:02X}")
    if data[1] != TYPE_TELEMETRY:
        raise BadFrameType(f"expected type 0x{TYPE_TELEMETRY:02X}, got 0x{data[1]:02X}")
    role_byte = data[4]
    if role_byte > 1:
        raise InvalidFieldValue(f"role byte must be 0 or 1, got {role_byte}")
    receiver = role_byte == 1
    expected = TELEMETRY_LEN_WITH_STRENGTH if receiver else TELEMETRY_LEN
    if len(data) < expected:
        raise TruncatedFrame(f"need {expected} bytes, got {len(data)}")
    if len(data) > expected:
        raise TrailingBytes(f"expected {expected} bytes, got {len(data)}")
    (stored,) = _CRC.unpack_from(data, expected - 2)
    if stored != crc16_ccitt(data[:-2]):
        raise BadChecksum(
            f"crc mismatch: stored 0x{stored:04X}, computed 0x{crc16_ccitt(data[:-2]):04X}"
        )
    (_, _, version, device_id, _, seq, buttons, ax, ay, az, gx, gy, gz) = _TELEMETRY_BASE.unpack_from(data, 0)
    if version != PROTOCOL_VERSION:
        raise UnknownVersion(f"unsupported protocol version {version}")
    strength = None
    if receiver:
        (strength,) = _STRENGTH.unpack_from(data, _TELEMETRY_BASE.size)
    return TelemetryFrame(
        device_id=device_id,
        role=DeviceRole.RECEIVER if receiver else DeviceRole.TRANSMITTER,
        seq=seq,
        buttons=buttons,
        accel_mg=(ax, ay, az),
        gyro_ddps=(gx, gy, gz),
        strength_u16=strength,
        version=version,
    )


def decode_command(data: bytes) -> CommandFrame:
    _check_envelope(data, TYPE_COMMAND, COMMAND_LEN)
    (_, _, version, device_id, seq, amplitude, duration, r, g, b) = _COMMAND_BASE.unpack_from(data, 0)
    if version != PROTOCOL_VERSION:
        raise UnknownVersion(f"unsupported protocol version {version}")
    if amplitude > LRA_AMPLITUDE_MAX:
        raise InvalidFieldValue(f"lra_amplitude must be 0..127, got {amplitude}")
    return CommandFrame(
        device_id=device_id,
        seq=seq,
        lra_amplitude=amplitude,
        lra_duration_ms=duration,
        led=(r, g, b),
        version=version,
    )


def decode_frame(data: bytes) -> TelemetryFrame | CommandFrame:
    """Decode either frame family, dispatching on the type byte."""
    if len(data) < 2:
        raise TruncatedFrame(f"need at least 2 bytes to dispatch, got {len(data)}")
    if data[0] != MAGIC:
        raise BadMagic(f"expected magic 0x{MAGIC:02X}, got 0x{data[0]:02X}")
    if data[1] == TYPE_TELEMETRY:
        return decode_telemetry(data)
    if data[1] == TYPE_COMMAND:
        return decode_command(data)
    raise BadFrameType(f"unknown frame type 0x{data[1]:02X}")


@dataclass(frozen=True)
class TransportConfig:
    latency_mean_ms: float = 15.0
    latency_jitter_ms: float = 5.0
    drop_probability: float = 0.005
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.latency_mean_ms < 0:
            raise ValueError(f"latency_mean_ms must be >= 0, got {self.latency_mean_ms}")
        if self.latency_jitter_ms < 0:
            raise ValueError(f"latency_jitter_ms must be >= 0, got {self.latency_jitter_ms}")
        if not 0.0 <= self.drop_probability <= 1.0:
            raise ValueError(f"drop_probability must be in [0, 1], got {self.drop_probability}")


class Transport:
    """One simplex link with sampled latency, random drops, FIFO delivery.

    Single-owner: `now_ms` must be non-decreasing across enqueue/poll calls.
    Dropped messages vanish silently but are counted.
    """

    def __init__(self, cfg: TransportConfig, rng: Random | None = None):
        self.cfg = cfg
        self._rng = rng if rng is not None else Random(cfg.seed)
        self._queue: deque[tuple[float, bytes]] = deque()
        self._last_deliver_at = 0.0
        self._last_now = float("-inf")
        self.sent = 0
        self.delivered = 0
        self.dropped = 0

    def _advance(self, now_ms: float) -> None:
        if now_ms < self._last_now:
            raise ValueError(f"time went backwards: {now_ms} < {self._last_now}")
        self._last_now = now_ms

    def enqueue(self, data: bytes, now_ms: float) -> None:
        self._advance(now_ms)
        self.sent += 1
        if self._rng.random() < self.cfg.drop_probability:
            self.dropped += 1
            return
        latency = self.cfg.latency_mean_ms
        if self.cfg.latency_jitter_ms > 0:
            latency += self._rng.uniform(-self.cfg.latency_jitter_ms, self.cfg.latency_jitter_ms)
        deliver_at = now_ms + max(0.0, latency)
        # FIFO even when a later message samples a shorter latency.
        deliver_at = max(deliver_at, self._last_deliver_at)
        self._last_deliver_at = deliver_at
        self._queue.append((deliver_at, bytes(data)))

    def poll(self, now_ms: float) -> list[bytes]:
        self._advance(now_ms)
        out = []
        while self._queue and self._queue[0][0] <= now_ms:
            out.append(self._queue.popleft()[1])
        self.delivered += len(out)
        return out

    @property
    def pending(self) -> int:
        return len(self._queue)
