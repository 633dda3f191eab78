"""Two-player bracelet game stack: touch channel, bracelet emulation, wire
protocol, phantom-sensation haptics, the fox-catching game, a deterministic
headless harness, and a live websocket service."""

from .bots import BOT_REGISTRY, BotObservation, BotPolicy, PlayerControl, make_bot
from .channel import (
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
from .config import BotSpec, ConfigFileError, SessionConfig, config_hash, load_config
from .device import (
    Buttons,
    DeviceState,
    ImuNoise,
    ImuReading,
    WristPose,
    apply_command,
    device_tick,
    imu_from_pose,
    roll_from_accel,
)
from .game import (
    BombHit,
    BombMode,
    CherryCaught,
    Entity,
    EntityKind,
    FoxMoved,
    GameConfig,
    GameEvent,
    GameState,
    ItemExited,
    PairInput,
    Scene,
    SceneChanged,
    SessionEnded,
    ViewModel,
    combine_inputs,
    new_session,
    render_model,
    step,
    tick_to_ms,
)
from .haptics import LINEAR, ActuatorPair, HapticsConfig, PanLaw, pan, perceived_position, step_pulse
from .harness import (
    ReplayDivergence,
    Session,
    SessionMetrics,
    TickResult,
    check_entity_conservation,
    derive_rng,
    derive_seed,
    metrics,
    replay,
    run_session,
    sweep,
)
from .log import LogError, LogFormatError, LogIntegrityError, SessionLog
from .protocol import (
    CommandFrame,
    DecodeError,
    DeviceRole,
    TelemetryFrame,
    Transport,
    TransportConfig,
    crc16_ccitt,
    decode_command,
    decode_frame,
    decode_telemetry,
    encode_command,
    encode_telemetry,
)

__version__ = "0.1.0"
