"""Session configuration: one dataclass tree, one YAML file, strict keys.

The file mirrors the SessionConfig sections (game, channel, classifier,
transport, haptics, bots, seed). Unknown keys anywhere are errors, and
validation failures are collected and reported field by field rather than
one at a time.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Mapping

import yaml

from .channel import ChannelConfig, ClassifierConfig
from .game import BombMode, GameConfig, Scene
from .haptics import HapticsConfig, PanLaw
from .protocol import TransportConfig

CONFIG_VERSION = 1


class ConfigFileError(ValueError):
    """One or more configuration problems; message lists each offending field."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {p}" for p in problems))


@dataclass(frozen=True)
class BotSpec:
    policy: str = "hold_and_chase"
    params: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class SessionConfig:
    seed: int = 0
    idle_ticks: int = 0  # optional warm-up ticks before the scored session
    game: GameConfig = field(default_factory=GameConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    transport: TransportConfig = field(default_factory=TransportConfig)
    haptics: HapticsConfig = field(default_factory=HapticsConfig)
    bots: tuple[BotSpec, BotSpec] = (BotSpec(), BotSpec())

    def __post_init__(self) -> None:
        if self.idle_ticks < 0:
            raise ValueError(f"idle_ticks must be >= 0, got {self.idle_ticks}")
        if len(self.bots) != 2:
            raise ValueError(f"exactly two bots are required, got {len(self.bots)}")


def _plain(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if is_dataclass(value) and not isinstance(value, type):
        return {f.name: _plain(getattr(value, f.name)) for f in fields(value)}
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def config_to_dict(cfg: SessionConfig) -> dict:
    """Emit the file-format shape; config_from_dict(config_to_dict(c)) == c."""
    d = _plain(cfg)
    d["config_version"] = CONFIG_VERSION
    # File-format spellings for the two sections with custom field shapes.
    law = cfg.haptics.law
    d["haptics"] = {
        "law": "linear" if law.is_linear else "power",
        "exponent": law.exponent,
        "gain": cfg.haptics.gain,
        "pulse_ms": cfg.haptics.pulse_ms,
    }
    d["bots"] = {
        "player1": {"policy": cfg.bots[0].policy, "params": _plain(dict(cfg.bots[0].params))},
        "player2": {"policy": cfg.bots[1].policy, "params": _plain(dict(cfg.bots[1].params))},
    }
    return d


def config_hash(cfg: SessionConfig) -> str:
    canonical = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _require_mapping(value: Any, path: str, problems: list[str]) -> dict:
    if value is None:
        return {}
    if not isinstance(value, Mapping):
        problems.append(f"{path}: expected a mapping, got {type(value).__name__}")
        return {}
    return dict(value)


def _build_section(cls, raw: Mapping[str, Any], path: str, problems: list[str], convert=None):
    known = {f.name for f in fields(cls)}
    kwargs = {}
    for key, value in raw.items():
        if key not in known:
            problems.append(f"{path}.{key}: unknown key")
            continue
        if convert is not None:
            try:
                value = convert(key, value)
            except (ValueError, KeyError, TypeError) as exc:
                problems.append(f"{path}.{key}: {exc}")
                continue
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        problems.append(f"{path}: {exc}")
        return cls()


def _convert_game(key: str, value: Any) -> Any:
    if key == "scene_schedule":
        schedule = []
        for i, entry in enumerate(value):
            if not isinstance(entry, (list, tuple)) or len(entry) != 2:
                raise ValueError(f"entry {i} must be [start_ms, day|night]")
            schedule.append((int(entry[0]), Scene(entry[1])))
        return tuple(schedule)
    if key == "bomb_mode":
        return BombMode(value)
    return value


def _build_haptics(raw: Mapping[str, Any], problems: list[str]) -> HapticsConfig:
    raw = dict(raw)
    law_name = raw.pop("law", "linear")
    exponent = raw.pop("exponent", None)
    try:
        if law_name == "linear":
            law = PanLaw.linear()
            if exponent is not None and float(exponent) != 1.0:
                problems.append("haptics.exponent: only 1.0 is valid for the linear law")
        elif law_name == "power":
            law = PanLaw.power(float(exponent) if exponent is not None else 1.0)
        else:
            problems.append(f"haptics.law: expected 'linear' or 'power', got {law_name!r}")
            law = PanLaw.linear()
    except ValueError as exc:
        problems.append(f"haptics.exponent: {exc}")
        law = PanLaw.linear()
    cfg = _build_section(HapticsConfig, {**raw, "law": law}, "haptics", problems)
    return cfg


def _build_bots(raw: Any, problems: list[str]) -> tuple[BotSpec, BotSpec]:
    if raw is None:
        return (BotSpec(), BotSpec())
    raw = _require_mapping(raw, "bots", problems)
    specs = []
    for slot in ("player1", "player2"):
        entry = _require_mapping(raw.pop(slot, None), f"bots.{slot}", problems)
        policy = entry.pop("policy", "hold_and_chase")
        params = _require_mapping(entry.pop("params", None), f"bots.{slot}.params", problems)
        for key in entry:
            problems.append(f"bots.{slot}.{key}: unknown key")
        specs.append(BotSpec(policy=str(policy), params=params))
    for key in raw:
        problems.append(f"bots.{key}: unknown key (expected player1/player2)")
    return (specs[0], specs[1])


_SECTIONS = ("seed", "idle_ticks", "game", "channel", "classifier", "transport", "haptics", "bots", "config_version")


def config_from_dict(data: Mapping[str, Any]) -> SessionConfig:
    problems: list[str] = []
    data = dict(data)
    version = data.pop("config_version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        problems.append(f"config_version: expected {CONFIG_VERSION}, got {version}")
    for key in data:
        if key not in _SECTIONS:
            problems.append(f"{key}: unknown key")
    # haptics arrive either file-style (law/exponent) or dict-style (law: {exponent})
    haptics_raw = _require_mapping(data.get("haptics"), "haptics", problems)
    if isinstance(haptics_raw.get("law"), Mapping):
        law_map = dict(haptics_raw.pop("law"))
        haptics_raw["law"] = "power"
        haptics_raw.setdefault("exponent", law_map.get("exponent", 1.0))

    game = _build_section(
        GameConfig, _require_mapping(data.get("game"), "game", problems), "game", problems, _convert_game
    )
    channel = _build_section(
        ChannelConfig, _require_mapping(data.get("channel"), "channel", problems), "channel", problems
    )
    classifier = _build_section(
        ClassifierConfig, _require_mapping(data.get("classifier"), "classifier", problems), "classifier", problems
    )
    transport = _build_section(
        TransportConfig, _require_mapping(data.get("transport"), "transport", problems), "transport", problems
    )
    haptics = _build_haptics(haptics_raw, problems)
    bots = _build_bots(data.get("bots"), problems)

    seed = data.get("seed", 0)
    idle_ticks = data.get("idle_ticks", 0)
    if not isinstance(seed, int):
        problems.append(f"seed: expected an integer, got {seed!r}")
        seed = 0
    if not isinstance(idle_ticks, int) or idle_ticks < 0:
        problems.append(f"idle_ticks: expected a non-negative integer, got {idle_ticks!r}")
        idle_ticks = 0

    if problems:
        raise ConfigFileError(problems)
    return SessionConfig(
        seed=seed,
        idle_ticks=idle_ticks,
        game=game,
        channel=channel,
        classifier=classifier,
        transport=transport,
        haptics=haptics,
        bots=bots,
    )


def load_config(path: str | Path) -> SessionConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigFileError([f"not valid YAML: {exc}"]) from exc
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise ConfigFileError([f"top level must be a mapping, got {type(data).__name__}"])
    return config_from_dict(data)
