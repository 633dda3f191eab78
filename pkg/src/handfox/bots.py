"""Scripted players for headless sessions.

Each bot turns an observation into one control sample per tick. The
observation is built by the harness; bots that are not allowed to know the
fox position get it redacted there, so the haptic-following player can only
localize the fox through the amplitude pairs it feels.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random
from typing import Sequence

from .game import Entity, EntityKind, GameConfig, Scene
from .haptics import LINEAR, ActuatorPair, PanLaw, perceived_position


@dataclass(frozen=True, slots=True)
class PlayerControl:
    """What one player does during a tick: touch flags plus wrist roll."""

    touch_held: bool = False
    touch_firm: bool = False
    roll_deg: float = 0.0


IDLE_CONTROL = PlayerControl()


@dataclass(slots=True)
class BotObservation:
    """Per-tick snapshot handed to a bot; entities are read-only borrows."""

    tick: int
    scene: Scene
    score: int
    controllable: bool
    stage_width: int
    stage_height: int
    entities: Sequence[Entity]
    fox_column: int | None  # None when redacted
    felt_pulse: tuple[float, float] | None  # wrist amplitudes when a pulse lands


class BotPolicy:
    """Base policy; subclasses override act()."""

    #: Whether the harness may reveal the true fox column in observations.
    sees_fox = False

    def __init__(self, rng: Random, cfg: GameConfig):
        self.rng = rng
        self.cfg = cfg

    def act(self, obs: BotObservation) -> PlayerControl:
        raise NotImplementedError


def _lowest(entities: Sequence[Entity], kind: EntityKind) -> Entity | None:
    best = None
    for e in entities:
        if e.kind is kind and (best is None or e.row > best.row):
            best = e
    return best


def _bomb_imminent(obs: BotObservation, column: float, warn_rows: float, slack: float) -> bool:
    bottom = obs.stage_height - 1
    for e in obs.entities:
        if e.kind is EntityKind.BOMB and bottom - e.row <= warn_rows and abs(e.column - column) <= slack:
            return True
    return False


class HoldAndChase(BotPolicy):
    """Always holds, chases the lowest cherry, lets go when a bomb is about
    to land on the fox. Sees the true fox column, so it also works at night."""

    sees_fox = True

    def __init__(self, rng: Random, cfg: GameConfig, tilt_deg: float = 45.0, bomb_warn_rows: float = 1.5):
        super().__init__(rng, cfg)
        self.tilt_deg = tilt_deg
        self.bomb_warn_rows = bomb_warn_rows

    def act(self, obs: BotObservation) -> PlayerControl:
        col = obs.fox_column if obs.fox_column is not None else (obs.stage_width - 1) // 2
        if _bomb_imminent(obs, col, self.bomb_warn_rows, 0.5):
            return PlayerControl(touch_held=False)
        target = _lowest(obs.entities, EntityKind.CHERRY)
        roll = 0.0
        if target is not None and target.column != col:
            roll = self.tilt_deg if target.column > col else -self.tilt_deg
        return PlayerControl(touch_held=True, roll_deg=roll)


class HapticChaser(BotPolicy):
    """Chases cherries without ever seeing the fox: it keeps a column estimate
    and corrects it from each pulse's amplitude ratio."""

    sees_fox = False

    def __init__(
        self,
        rng: Random,
        cfg: GameConfig,
        law: PanLaw = LINEAR,
        tilt_deg: float = 45.0,
        bomb_warn_rows: float = 1.5,
    ):
        super().__init__(rng, cfg)
        self.law = law
        self.tilt_deg = tilt_deg
        self.bomb_warn_rows = bomb_warn_rows
        self.estimated_column = float((cfg.stage_width - 1) // 2)  # spawn column

    def act(self, obs: BotObservation) -> PlayerControl:
        if obs.felt_pulse is not None:
            left, right = obs.felt_pulse
            if left > 0 or right > 0:
                p = perceived_position(ActuatorPair(left=left, right=right), self.law)
                self.estimated_column = p * (obs.stage_width - 1)
        col = self.estimated_column
        if _bomb_imminent(obs, col, self.bomb_warn_rows, 0.75):
            return PlayerControl(touch_held=False)
        target = _lowest(obs.entities, EntityKind.CHERRY)
        roll = 0.0
        if target is not None:
            if target.column > col + 0.4:
                roll = self.tilt_deg
            elif target.column < col - 0.4:
                roll = -self.tilt_deg
        return PlayerControl(touch_held=True, roll_deg=roll)


class RandomReleaser(BotPolicy):
    """Baseline: re-rolls touch and tilt at a fixed cadence."""

    sees_fox = False

    def __init__(
        self,
        rng: Random,
        cfg: GameConfig,
        hold_prob: float = 0.5,
        firm_prob: float = 0.2,
        max_tilt_deg: float = 60.0,
        redraw_ticks: int = 15,
    ):
        super().__init__(rng, cfg)
        self.hold_prob = hold_prob
        self.firm_prob = firm_prob
        self.max_tilt_deg = max_tilt_deg
        self.redraw_ticks = max(1, redraw_ticks)
        self._control = IDLE_CONTROL
        self._age = self.redraw_ticks  # force a draw on first act

    def act(self, obs: BotObservation) -> PlayerControl:
        if self._age >= self.redraw_ticks:
            held = self.rng.random() < self.hold_prob
            firm = held and self.rng.random() < self.firm_prob
            roll = self.rng.uniform(-self.max_tilt_deg, self.max_tilt_deg)
            self._control = PlayerControl(touch_held=held, touch_firm=firm, roll_deg=roll)
            self._age = 0
        self._age += 1
        return self._control


def _never_touch(rng: Random, cfg: GameConfig, **params) -> RandomReleaser:
    params.setdefault("hold_prob", 0.0)
    return RandomReleaser(rng, cfg, **params)


BOT_REGISTRY = {
    "hold_and_chase": HoldAndChase,
    "haptic_chaser": HapticChaser,
    "random_releaser": RandomReleaser,
    "never_touch": _never_touch,
}


def make_bot(name: str, rng: Random, cfg: GameConfig, law: PanLaw = LINEAR, **params) -> BotPolicy:
    try:
        factory = BOT_REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown bot policy {name!r}; known: {sorted(BOT_REGISTRY)}") from None
    if factory is HapticChaser:
        params.setdefault("law", law)
    return factory(rng, cfg, **params)
