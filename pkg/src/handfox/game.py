"""Fox-catching stage: touch-gated control, tilt steering, falling items.

The game advances in fixed ticks. Holding hands makes the fox controllable
(opaque); releasing makes it semi-transparent, unsteerable, and transparent
to items, which is also how bombs are dodged. While controllable, a combined
wrist-roll past the tilt threshold steps the fox one column per move-repeat
interval. Cherries score, bombs cost points (floored at zero), a night phase
hides the fox from the screen without changing the physics, and the session
ends after a fixed length of simulated time.

Time is kept in integer ticks so that the end of a session lands on an exact
millisecond boundary; `tick_to_ms` converts exactly whenever 1000 divides
tick * 1000 evenly by the tick rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from random import Random

from .channel import TouchState
from .device import WristPose


class Scene(Enum):
    DAY = "day"
    NIGHT = "night"


class EntityKind(Enum):
    CHERRY = "cherry"
    BOMB = "bomb"


class BombMode(Enum):
    PENALTY = "penalty"
    END_SESSION = "end_session"


DEFAULT_SCENE_SCHEDULE = ((0, Scene.DAY), (60_000, Scene.NIGHT), (90_000, Scene.DAY))


class ConfigError(ValueError):
    """Invalid game configuration; the message names the offending field."""


@dataclass(frozen=True)
class GameConfig:
    stage_width: int = 9
    stage_height: int = 12
    session_length_ms: int = 120_000
    tick_hz: int = 60
    cherry_spawn_rate: float = 0.8  # items per second
    bomb_spawn_rate: float = 0.25
    fall_speed: float = 2.0  # rows per second
    tilt_threshold_deg: float = 20.0
    move_repeat_ms: float = 250.0
    cherry_points: int = 10
    bomb_penalty: int = 30
    bomb_mode: BombMode = BombMode.PENALTY
    scene_schedule: tuple[tuple[int, Scene], ...] = DEFAULT_SCENE_SCHEDULE

    def __post_init__(self) -> None:
        if self.stage_width < 2:
            raise ConfigError(f"stage_width must be >= 2, got {self.stage_width}")
        if self.stage_height < 2:
            raise ConfigError(f"stage_height must be >= 2, got {self.stage_height}")
        if self.session_length_ms <= 0:
            raise ConfigError(f"session_length_ms must be > 0, got {self.session_length_ms}")
        if self.tick_hz < 1:
            raise ConfigError(f"tick_hz must be >= 1, got {self.tick_hz}")
        if (self.session_length_ms * self.tick_hz) % 1000 != 0:
            raise ConfigError(
                f"session_length_ms={self.session_length_ms} is not a whole number of "
                f"ticks at tick_hz={self.tick_hz}"
            )
        if self.cherry_spawn_rate < 0:
            raise ConfigError(f"cherry_spawn_rate must be >= 0, got {self.cherry_spawn_rate}")
        if self.bomb_spawn_rate < 0:
            raise ConfigError(f"bomb_spawn_rate must be >= 0, got {self.bomb_spawn_rate}")
        if self.fall_speed <= 0:
            raise ConfigError(f"fall_speed must be > 0, got {self.fall_speed}")
        if self.tilt_threshold_deg <= 0:
            raise ConfigError(f"tilt_threshold_deg must be > 0, got {self.tilt_threshold_deg}")
        if self.move_repeat_ms < 0:
            raise ConfigError(f"move_repeat_ms must be >= 0, got {self.move_repeat_ms}")
        if self.cherry_points < 0:
            raise ConfigError(f"cherry_points must be >= 0, got {self.cherry_points}")
        if self.bomb_penalty < 0:
            raise ConfigError(f"bomb_penalty must be >= 0, got {self.bomb_penalty}")
        if not self.scene_schedule:
            raise ConfigError("scene_schedule must not be empty")
        if self.scene_schedule[0][0] != 0:
            raise ConfigError(
                f"scene_schedule must start at 0 ms, got {self.scene_schedule[0][0]}"
            )
        starts = [start for start, _ in self.scene_schedule]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ConfigError(f"scene_schedule starts must strictly increase, got {starts}")

    @property
    def tick_ms(self) -> float:
        return 1000.0 / self.tick_hz

    @property
    def session_ticks(self) -> int:
        return self.session_length_ms * self.tick_hz // 1000

    @property
    def move_repeat_ticks(self) -> int:
        return round(self.move_repeat_ms * self.tick_hz / 1000.0)

    @property
    def fall_per_tick(self) -> float:
        return self.fall_speed / self.tick_hz


def tick_to_ms(tick: int, tick_hz: int) -> float:
    """Simulated time of a tick boundary; exact when the division is exact."""
    q, r = divmod(tick * 1000, tick_hz)
    return float(q) if r == 0 else tick * 1000.0 / tick_hz


def scene_at(cfg: GameConfig, time_ms: float) -> Scene:
    current = cfg.scene_schedule[0][1]
    for start, scene in cfg.scene_schedule:
        if start <= time_ms:
            current = scene
        else:
            break
    return current


@dataclass(frozen=True, slots=True)
class PairInput:
    """Per-tick fused input of the two players."""

    touch: TouchState
    combined_roll_deg: float
    p1_roll_deg: float = 0.0
    p2_roll_deg: float = 0.0

    def __post_init__(self) -> None:
        if not -180.0 <= self.combined_roll_deg <= 180.0:
            raise ValueError(f"combined_roll_deg must be in [-180, 180], got {self.combined_roll_deg}")


IDLE_INPUT = PairInput(touch=TouchState.NO_TOUCH, combined_roll_deg=0.0)


def combine_inputs(
    p1: WristPose,
    p2: WristPose,
    touch: TouchState,
    tilt_threshold_deg: float = 20.0,
) -> PairInput:
    """Fuse the two wrist rolls into one steering signal.

    The combined roll is the mean of the two angles, except that decisive
    gestures in opposite directions cancel to zero: steering only works when
    the pair agrees.
    """
    r1, r2 = p1.roll_deg, p2.roll_deg
    combined = (r1 + r2) / 2.0
    if (r1 > 0) != (r2 > 0) and abs(r1) >= tilt_threshold_deg and abs(r2) >= tilt_threshold_deg:
        combined = 0.0
    return PairInput(touch=touch, combined_roll_deg=combined, p1_roll_deg=r1, p2_roll_deg=r2)


@dataclass(slots=True)
class Entity:
    id: int
    kind: EntityKind
    column: int
    row: float  # continuous rows measured from the top


# --- events -----------------------------------------------------------------


@dataclass(frozen=True)
class GameEvent:
    tick: int
    time_ms: float


@dataclass(frozen=True)
class FoxMoved(GameEvent):
    direction: int  # +1 right, -1 left


@dataclass(frozen=True)
class CherryCaught(GameEvent):
    entity_id: int


@dataclass(frozen=True)
class BombHit(GameEvent):
    entity_id: int


@dataclass(frozen=True)
class ItemExited(GameEvent):
    entity_id: int
    kind: EntityKind


@dataclass(frozen=True)
class SceneChanged(GameEvent):
    scene: Scene


@dataclass(frozen=True)
class SessionEnded(GameEvent):
    final_score: int


_EVENT_ORDER = {FoxMoved: 0, CherryCaught: 1, BombHit: 2, ItemExited: 3, SceneChanged: 4, SessionEnded: 5}


def _event_sort_key(event: GameEvent) -> tuple[int, int]:
    return (_EVENT_ORDER[type(event)], getattr(event, "entity_id", -1))


# --- state ------------------------------------------------------------------


@dataclass
class GameState:
    fox_column: int
    scene: Scene
    rng: Random
    controllable: bool = False
    entities: list[Entity] = field(default_factory=list)
    score: int = 0
    tick: int = 0
    move_cooldown_ticks: int = 0
    next_entity_id: int = 0
    terminal: bool = False


def state_snapshot(state: GameState) -> tuple:
    """Comparable value snapshot, including the generator state."""
    return (
        state.fox_column,
        state.controllable,
        tuple((e.id, e.kind, e.column, e.row) for e in state.entities),
        state.score,
        state.scene,
        state.tick,
        state.move_cooldown_ticks,
        state.next_entity_id,
        state.terminal,
        state.rng.getstate(),
    )


def new_session(cfg: GameConfig, seed: int) -> GameState:
    return GameState(
        fox_column=(cfg.stage_width - 1) // 2,
        scene=scene_at(cfg, 0),
        rng=Random(seed),
    )


def clock_ms(state: GameState, cfg: GameConfig) -> float:
    return tick_to_ms(state.tick, cfg.tick_hz)


def step(state: GameState, inp: PairInput, cfg: GameConfig) -> tuple[GameState, list[GameEvent]]:
    """Advance one tick. Mutates `state` in place and returns it with the
    tick's events; stepping a finished session is a no-op with no events."""
    if state.terminal:
        return state, []

    boundary = state.tick + 1
    now_ms = tick_to_ms(boundary, cfg.tick_hz)
    events: list[GameEvent] = []

    state.controllable = inp.touch is not TouchState.NO_TOUCH

    # Steering: one column per move-repeat interval while held and tilted.
    if state.move_cooldown_ticks > 0:
        state.move_cooldown_ticks -= 1
    if (
        state.controllable
        and state.move_cooldown_ticks == 0
        and abs(inp.combined_roll_deg) >= cfg.tilt_threshold_deg
    ):
        direction = 1 if inp.combined_roll_deg > 0 else -1
        target = min(cfg.stage_width - 1, max(0, state.fox_column + direction))
        if target != state.fox_column:
            state.fox_column = target
            state.move_cooldown_ticks = cfg.move_repeat_ticks
            events.append(FoxMoved(tick=boundary, time_ms=now_ms, direction=direction))

    # Falling items: each is resolved exactly once, at the tick its row
    # crosses the fox row. Collisions only exist while controllable.
    bottom = cfg.stage_height - 1
    fall = cfg.fall_per_tick
    survivors = []
    bomb_ended = False
    for entity in state.entities:
        prev_row = entity.row
        entity.row += fall
        if prev_row < bottom <= entity.row:
            if state.controllable and entity.column == state.fox_column:
                if entity.kind is EntityKind.CHERRY:
                    state.score += cfg.cherry_points
                    events.append(CherryCaught(tick=boundary, time_ms=now_ms, entity_id=entity.id))
                else:
                    state.score = max(0, state.score - cfg.bomb_penalty)
                    events.append(BombHit(tick=boundary, time_ms=now_ms, entity_id=entity.id))
                    if cfg.bomb_mode is BombMode.END_SESSION:
                        bomb_ended = True
            else:
                events.append(
                    ItemExited(tick=boundary, time_ms=now_ms, entity_id=entity.id, kind=entity.kind)
                )
        else:
            survivors.append(entity)
    state.entities = survivors

    # Spawns, drawn in a fixed order for determinism.
    for kind, rate in ((EntityKind.CHERRY, cfg.cherry_spawn_rate), (EntityKind.BOMB, cfg.bomb_spawn_rate)):
        if rate > 0 and state.rng.random() < rate / cfg.tick_hz:
            state.entities.append(
                Entity(
                    id=state.next_entity_id,
                    kind=kind,
                    column=state.rng.randrange(cfg.stage_width),
                    row=0.0,
                )
            )
            state.next_entity_id += 1

    state.tick = boundary
    new_scene = scene_at(cfg, now_ms)
    if new_scene is not state.scene:
        state.scene = new_scene
        events.append(SceneChanged(tick=boundary, time_ms=now_ms, scene=new_scene))

    if boundary >= cfg.session_ticks or bomb_ended:
        for entity in state.entities:
            events.append(
                ItemExited(tick=boundary, time_ms=now_ms, entity_id=entity.id, kind=entity.kind)
            )
        state.entities = []
        events.append(SessionEnded(tick=boundary, time_ms=now_ms, final_score=state.score))
        state.terminal = True

    events.sort(key=_event_sort_key)
    return state, events


# --- view -------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ViewEntity:
    id: int
    kind: EntityKind
    column: int
    row: float


@dataclass(frozen=True)
class ViewModel:
    """What the screen may show; at night the fox position is withheld."""

    fox_column: int | None
    opaque: bool
    entities: tuple[ViewEntity, ...]
    score: int
    scene: Scene
    time_remaining_ms: float
    stage_width: int
    stage_height: int


def render_model(state: GameState, cfg: GameConfig) -> ViewModel:
    return ViewModel(
        fox_column=None if state.scene is Scene.NIGHT else state.fox_column,
        opaque=state.controllable,
        entities=tuple(ViewEntity(e.id, e.kind, e.column, e.row) for e in state.entities),
        score=state.score,
        scene=state.scene,
        time_remaining_ms=cfg.session_length_ms - clock_ms(state, cfg),
        stage_width=cfg.stage_width,
        stage_height=cfg.stage_height,
    )
