"""Append-only session log: one JSON object per line, header first, end last.

The log carries everything needed to reproduce a session: the full config and
seed in the header, then per-tick input/telemetry/command/haptic/event records
in order, then a terminator with record counts. Serialization is canonical
(sorted keys, fixed separators), so identical sessions produce byte-identical
logs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator

from .config import SessionConfig, config_from_dict, config_hash, config_to_dict
from .game import (
    BombHit,
    CherryCaught,
    EntityKind,
    FoxMoved,
    GameEvent,
    ItemExited,
    Scene,
    SceneChanged,
    SessionEnded,
)

LOG_FORMAT_VERSION = 1


class LogError(ValueError):
    pass


class LogFormatError(LogError):
    """Structurally broken log: bad header, missing terminator, bad JSON."""


class LogIntegrityError(LogError):
    """Structurally fine but inconsistent: hash or count mismatch."""


def event_to_record(event: GameEvent) -> dict:
    rec: dict[str, Any] = {"record": "event", "tick": event.tick, "time_ms": event.time_ms}
    if isinstance(event, FoxMoved):
        rec["kind"] = "fox_moved"
        rec["direction"] = event.direction
    elif isinstance(event, CherryCaught):
        rec["kind"] = "cherry_caught"
        rec["entity_id"] = event.entity_id
    elif isinstance(event, BombHit):
        rec["kind"] = "bomb_hit"
        rec["entity_id"] = event.entity_id
    elif isinstance(event, ItemExited):
        rec["kind"] = "item_exited"
        rec["entity_id"] = event.entity_id
        rec["entity_kind"] = event.kind.value
    elif isinstance(event, SceneChanged):
        rec["kind"] = "scene_changed"
        rec["scene"] = event.scene.value
    elif isinstance(event, SessionEnded):
        rec["kind"] = "session_ended"
        rec["final_score"] = event.final_score
    else:  # pragma: no cover - new event kinds must be added here
        raise TypeError(f"unknown event type {type(event).__name__}")
    return rec


def event_from_record(rec: dict) -> GameEvent:
    kind = rec.get("kind")
    tick, time_ms = rec["tick"], rec["time_ms"]
    if kind == "fox_moved":
        return FoxMoved(tick=tick, time_ms=time_ms, direction=rec["direction"])
    if kind == "cherry_caught":
        return CherryCaught(tick=tick, time_ms=time_ms, entity_id=rec["entity_id"])
    if kind == "bomb_hit":
        return BombHit(tick=tick, time_ms=time_ms, entity_id=rec["entity_id"])
    if kind == "item_exited":
        return ItemExited(
            tick=tick, time_ms=time_ms, entity_id=rec["entity_id"], kind=EntityKind(rec["entity_kind"])
        )
    if kind == "scene_changed":
        return SceneChanged(tick=tick, time_ms=time_ms, scene=Scene(rec["scene"]))
    if kind == "session_ended":
        return SessionEnded(tick=tick, time_ms=time_ms, final_score=rec["final_score"])
    raise LogFormatError(f"unknown event kind {kind!r}")


def _dump_line(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _fast_line(rec: dict) -> str:
    """Hand-formatted canonical JSON for the high-volume record shapes.

    Must emit byte-identical output to _dump_line; the shared test suite
    asserts that. Falls back to json for anything unexpected.
    """
    kind = rec["record"]
    try:
        if kind == "telemetry" or kind == "command":
            if len(rec) == 4:
                return (
                    f'{{"device_id":{rec["device_id"]},"hex":"{rec["hex"]}",'
                    f'"record":"{kind}","tick":{rec["tick"]}}}'
                )
        elif kind == "input":
            if len(rec) == 6:
                return (
                    f'{{"combined_roll":{rec["combined_roll"]!r},"p1_roll":{rec["p1_roll"]!r},'
                    f'"p2_roll":{rec["p2_roll"]!r},"record":"input","tick":{rec["tick"]},'
                    f'"touch":"{rec["touch"]}"}}'
                )
        elif kind == "haptic":
            if len(rec) == 7:
                return (
                    f'{{"duration_ms":{rec["duration_ms"]!r},"fox_column":{rec["fox_column"]},'
                    f'"left":{rec["left"]!r},"position":{rec["position"]!r},"record":"haptic",'
                    f'"right":{rec["right"]!r},"tick":{rec["tick"]}}}'
                )
    except (KeyError, TypeError):
        pass
    return _dump_line(rec)


@dataclass
class SessionLog:
    config: SessionConfig
    seed: int
    records: list[dict] = field(default_factory=list)

    @property
    def config_hash(self) -> str:
        return config_hash(self.config)

    def of_kind(self, record_kind: str) -> Iterator[dict]:
        return (r for r in self.records if r["record"] == record_kind)

    @property
    def events(self) -> list[dict]:
        return list(self.of_kind("event"))

    @property
    def inputs(self) -> list[dict]:
        return list(self.of_kind("input"))

    @property
    def haptic_pulses(self) -> list[dict]:
        return list(self.of_kind("haptic"))

    def final_score(self) -> int | None:
        for rec in reversed(self.records):
            if rec["record"] == "event" and rec["kind"] == "session_ended":
                return rec["final_score"]
        return None

    def dumps(self) -> str:
        header = {
            "record": "header",
            "format_version": LOG_FORMAT_VERSION,
            "seed": self.seed,
            "config_hash": self.config_hash,
            "config": config_to_dict(self.config),
        }
        end = {
            "record": "end",
            "record_count": len(self.records),
            "event_count": sum(1 for r in self.records if r["record"] == "event"),
        }
        lines = [_dump_line(header)]
        lines.extend(_fast_line(r) for r in self.records)
        lines.append(_dump_line(end))
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "SessionLog":
        lines = [line for line in text.splitlines() if line.strip()]
        if not lines:
            raise LogFormatError("empty log")
        try:
            parsed = [json.loads(line) for line in lines]
        except json.JSONDecodeError as exc:
            raise LogFormatError(f"log line is not valid JSON: {exc}") from exc

        header = parsed[0]
        if header.get("record") != "header":
            raise LogFormatError("first record must be the header")
        if header.get("format_version") != LOG_FORMAT_VERSION:
            raise LogFormatError(
                f"unsupported log format version {header.get('format_version')!r}"
            )
        end = parsed[-1]
        if end.get("record") != "end":
            raise LogFormatError("missing end terminator record")

        records = parsed[1:-1]
        if end.get("record_count") != len(records):
            raise LogIntegrityError(
                f"end record counts {end.get('record_count')} records, log has {len(records)}"
            )
        event_count = sum(1 for r in records if r.get("record") == "event")
        if end.get("event_count") != event_count:
            raise LogIntegrityError(
                f"end record counts {end.get('event_count')} events, log has {event_count}"
            )
        config = config_from_dict(header.get("config") or {})
        log = cls(config=config, seed=header.get("seed", 0), records=records)
        if header.get("config_hash") != log.config_hash:
            raise LogIntegrityError("config hash in header does not match the stored config")
        return log

    @classmethod
    def load(cls, path: str | Path) -> "SessionLog":
        return cls.loads(Path(path).read_text(encoding="utf-8"))
