"""Deterministic end-to-end runner.

One Session wires the whole pipeline for a tick: player controls -> pair
contact -> channel measurement at the receiver -> both bracelets' telemetry
-> lossy uplinks -> host decode with input latching -> touch classification
and gesture fusion -> game step -> haptic pulse commands -> lossy downlinks
-> bracelet envelopes. Scripted bots drive it headless; the live service
drives the identical engine from client input.

Every stochastic component draws from its own stream derived from the one
session seed, so adding a component never perturbs the others, and a session
is a pure function of its config: identical configs give byte-identical logs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from pathlib import Path
from random import Random

import numpy as np

from .bots import BotObservation, BotPolicy, PlayerControl, make_bot
from .channel import (
    ContactInput,
    TouchState,
    adc_quantize,
    classify,
    contact_area_for,
    signal_strength,
)
from .config import SessionConfig
from .device import DeviceState, WristPose, apply_command, device_tick, roll_from_accel
from .game import (
    FoxMoved,
    GameEvent,
    GameState,
    PairInput,
    ViewModel,
    combine_inputs,
    new_session,
    render_model,
    step as game_step,
)
from .device import ImuNoise
from .haptics import step_pulse
from .log import SessionLog, event_to_record
from .protocol import (
    LRA_AMPLITUDE_MAX,
    STRENGTH_SCALE,
    CommandFrame,
    DeviceRole,
    Transport,
    decode_command,
    decode_telemetry,
    encode_command,
    encode_telemetry,
)

DEFAULT_IMU_NOISE = ImuNoise()


def derive_seed(seed: int, label: str) -> int:
    """Stable per-component seed: hash of the session seed and a stream label."""
    digest = hashlib.sha256(f"{seed}/{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_rng(seed: int, label: str) -> Random:
    return Random(derive_seed(seed, label))


class GaussPool:
    """Seeded gaussian source with the same .gauss interface as random.Random,
    drawing from pre-generated blocks; much cheaper in the per-tick loop."""

    __slots__ = ("_gen", "_block", "_buf", "_i")

    def __init__(self, seed: int, block: int = 8192):
        self._gen = np.random.default_rng(seed)
        self._block = block
        self._buf = self._gen.standard_normal(block).tolist()
        self._i = 0

    def gauss(self, mu: float, sigma: float) -> float:
        i = self._i
        if i >= self._block:
            self._buf = self._gen.standard_normal(self._block).tolist()
            i = 0
        self._i = i + 1
        return mu + sigma * self._buf[i]


class ReplayDivergence(ValueError):
    def __init__(self, tick: int, expected: list[dict], actual: list[dict]):
        self.tick = tick
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"replay diverged at tick {tick}: log has {expected}, replay produced {actual}"
        )


@dataclass(frozen=True)
class TickResult:
    tick: int  # boundary index reached by this step
    events: list[GameEvent]
    amplitudes: tuple[float, float]  # current wrist envelopes, post delivery
    felt_pulse: tuple[float, float] | None  # set when a command landed this tick
    done: bool


class Session:
    """One wired-up session, stepped tick by tick."""

    def __init__(self, cfg: SessionConfig):
        self.cfg = cfg
        seed = cfg.seed
        self.game: GameState = new_session(cfg.game, derive_seed(seed, "game"))
        self.devices = [
            DeviceState(role=DeviceRole.TRANSMITTER, device_id=1),
            DeviceState(role=DeviceRole.RECEIVER, device_id=2),
        ]
        self.uplinks = [
            Transport(cfg.transport, derive_rng(seed, "uplink/p1")),
            Transport(cfg.transport, derive_rng(seed, "uplink/p2")),
        ]
        self.downlinks = [
            Transport(cfg.transport, derive_rng(seed, "downlink/p1")),
            Transport(cfg.transport, derive_rng(seed, "downlink/p2")),
        ]
        self._rng_channel = GaussPool(derive_seed(seed, "channel"))
        self._rng_imu = [GaussPool(derive_seed(seed, "imu/p1")), GaussPool(derive_seed(seed, "imu/p2"))]
        self._area = {
            TouchState.GENTLE: contact_area_for(TouchState.GENTLE, cfg.channel, cfg.classifier),
            TouchState.STRONG: contact_area_for(TouchState.STRONG, cfg.channel, cfg.classifier),
        }
        # Noiseless strengths per contact level; the per-tick path only adds
        # noise, clamps, and quantizes, identically to channel.measure().
        self._base_strength = {
            level: signal_strength(ContactInput(area, 0.0), None, cfg.channel.saturation_area_cm2)
            for level, area in ((TouchState.NO_TOUCH, 0.0), *self._area.items())
        }
        # Host-side latches: last decoded values persist across radio gaps.
        self._latched_strength = 0.0
        self._touch = TouchState.NO_TOUCH
        self._latched_rolls = [0.0, 0.0]
        self._prev_rolls = [0.0, 0.0]
        self._pose_cache = [WristPose(), WristPose()]
        self._cmd_seq = [0, 0]
        self.records: list[dict] = []
        self.tick = 0
        # Hot-loop constants.
        self._tick_ms = cfg.game.tick_ms
        self._tick_hz = cfg.game.tick_hz
        self._noise_sigma = cfg.channel.noise_sigma
        self._sat_area = cfg.channel.saturation_area_cm2
        self._adc_bits = cfg.channel.adc_bits

    # -- per-tick pipeline --------------------------------------------------

    def _pair_level(self, c1: PlayerControl, c2: PlayerControl) -> TouchState:
        # Contact only exists at the level both players commit to.
        if not (c1.touch_held and c2.touch_held):
            return TouchState.NO_TOUCH
        if c1.touch_firm and c2.touch_firm:
            return TouchState.STRONG
        return TouchState.GENTLE

    def step(self, c1: PlayerControl, c2: PlayerControl) -> TickResult:
        cfg = self.cfg
        t = self.tick
        tick_ms = self._tick_ms
        now = t * tick_ms
        records_append = self.records.append

        # Contact between the hands, measured at the receiver's ADC; same
        # arithmetic as channel.measure() with the noiseless part precomputed.
        s = self._base_strength[self._pair_level(c1, c2)]
        if self._noise_sigma > 0:
            s += self._rng_channel.gauss(0.0, self._noise_sigma)
            if s < 0.0:
                s = 0.0
            elif s > 1.0:
                s = 1.0
        strength = adc_quantize(s, self._adc_bits)

        # Bracelets: pose from controls, one telemetry frame each, uplink.
        for i, control in enumerate((c1, c2)):
            roll = max(-180.0, min(180.0, control.roll_deg))
            rate = (roll - self._prev_rolls[i]) * self._tick_hz
            self._prev_rolls[i] = roll
            pose = self._pose_cache[i]
            if pose.roll_deg != roll or pose.roll_rate_dps != rate:
                pose = WristPose(roll_deg=roll, roll_rate_dps=rate)
                self._pose_cache[i] = pose
            dev = self.devices[i]
            dev, frame = device_tick(
                dev,
                tick_ms,
                strength=strength if dev.role is DeviceRole.RECEIVER else None,
                rng=self._rng_imu[i],
                noise=DEFAULT_IMU_NOISE,
                pose=pose,
            )
            self.devices[i] = dev
            data = encode_telemetry(frame)
            records_append(
                {"record": "telemetry", "tick": t, "device_id": dev.device_id, "hex": data.hex()}
            )
            self.uplinks[i].enqueue(data, now)

        # Host: drain uplinks, latch the latest readings.
        for i, link in enumerate(self.uplinks):
            for data in link.poll(now):
                frame = decode_telemetry(data)
                if frame.strength_u16 is not None:
                    self._latched_strength = frame.strength_u16 / STRENGTH_SCALE
                ax, ay, az = frame.accel_mg
                self._latched_rolls[i] = roll_from_accel((ax / 1000.0, ay / 1000.0, az / 1000.0))

        self._touch = classify(self._latched_strength, self._touch, cfg.classifier)
        pair = combine_inputs(
            WristPose(roll_deg=self._latched_rolls[0]),
            WristPose(roll_deg=self._latched_rolls[1]),
            self._touch,
            cfg.game.tilt_threshold_deg,
        )
        records_append(
            {
                "record": "input",
                "tick": t,
                "touch": pair.touch.value,
                "combined_roll": pair.combined_roll_deg,
                "p1_roll": pair.p1_roll_deg,
                "p2_roll": pair.p2_roll_deg,
            }
        )

        _, events = game_step(self.game, pair, cfg.game)
        for event in events:
            records_append(event_to_record(event))

        # Each fox step becomes one phantom pulse, fanned out as two commands.
        for event in events:
            if isinstance(event, FoxMoved):
                pulse = step_pulse(
                    self.game.fox_column,
                    cfg.game.stage_width,
                    cfg.haptics.gain,
                    cfg.haptics.law,
                    cfg.haptics.pulse_ms,
                )
                self.records.append(
                    {
                        "record": "haptic",
                        "tick": t,
                        "left": pulse.left,
                        "right": pulse.right,
                        "duration_ms": pulse.duration_ms,
                        "fox_column": self.game.fox_column,
                        "position": self.game.fox_column / (cfg.game.stage_width - 1),
                    }
                )
                duration = round(pulse.duration_ms)
                for i, amplitude in enumerate((pulse.left, pulse.right)):
                    cmd = CommandFrame(
                        device_id=self.devices[i].device_id,
                        seq=self._cmd_seq[i],
                        lra_amplitude=round(amplitude * LRA_AMPLITUDE_MAX),
                        lra_duration_ms=duration,
                        led=(0, 0, 0),
                    )
                    self._cmd_seq[i] = (self._cmd_seq[i] + 1) & 0xFFFF
                    data = encode_command(cmd)
                    self.records.append(
                        {
                            "record": "command",
                            "tick": t,
                            "device_id": cmd.device_id,
                            "hex": data.hex(),
                        }
                    )
                    self.downlinks[i].enqueue(data, now)

        # Bracelets: drain downlinks, latch envelopes.
        landed = False
        for i, link in enumerate(self.downlinks):
            for data in link.poll(now):
                self.devices[i] = apply_command(self.devices[i], decode_command(data))
                landed = True

        amplitudes = (self.devices[0].lra_amplitude, self.devices[1].lra_amplitude)
        self.tick = t + 1
        return TickResult(
            tick=self.game.tick,
            events=events,
            amplitudes=amplitudes,
            felt_pulse=amplitudes if landed else None,
            done=self.game.terminal,
        )

    def view(self) -> ViewModel:
        return render_model(self.game, self.cfg.game)

    # -- bot-driven run -----------------------------------------------------

    def _observe(self, bot: BotPolicy, felt_pulse: tuple[float, float] | None) -> BotObservation:
        game = self.game
        return BotObservation(
            tick=game.tick,
            scene=game.scene,
            score=game.score,
            controllable=game.controllable,
            stage_width=self.cfg.game.stage_width,
            stage_height=self.cfg.game.stage_height,
            entities=game.entities,
            fox_column=game.fox_column if bot.sees_fox else None,
            felt_pulse=felt_pulse,
        )

    def run(self) -> SessionLog:
        cfg = self.cfg
        bots = [
            make_bot(
                spec.policy,
                derive_rng(cfg.seed, f"bot/p{i + 1}"),
                cfg.game,
                law=cfg.haptics.law,
                **spec.params,
            )
            for i, spec in enumerate(cfg.bots)
        ]
        for _ in range(cfg.idle_ticks):
            self.step(PlayerControl(), PlayerControl())
        felt: tuple[float, float] | None = None
        while not self.game.terminal:
            c1 = bots[0].act(self._observe(bots[0], felt))
            c2 = bots[1].act(self._observe(bots[1], felt))
            result = self.step(c1, c2)
            felt = result.felt_pulse
        return self.finish()

    def finish(self) -> SessionLog:
        return SessionLog(config=self.cfg, seed=self.cfg.seed, records=self.records)


def run_session(cfg: SessionConfig) -> SessionLog:
    """Run a full headless session; a pure function of the config."""
    return Session(cfg).run()


# --- replay ------------------------------------------------------------------


def replay(log: SessionLog) -> GameState:
    """Re-execute the logged inputs and check they reproduce the logged events.

    Raises ReplayDivergence at the first tick whose events differ, and
    LogError flavors for structurally broken logs (SessionLog.loads already
    rejects those on parse).
    """
    cfg = log.config
    state = new_session(cfg.game, derive_seed(log.seed, "game"))

    logged_events: dict[int, list[dict]] = {}
    for rec in log.events:
        logged_events.setdefault(rec["tick"], []).append(rec)

    expected_tick = 0
    for rec in log.inputs:
        if rec["tick"] != expected_tick:
            raise ReplayDivergence(expected_tick, [{"missing input": expected_tick}], [rec])
        expected_tick += 1
        pair = PairInput(
            touch=TouchState(rec["touch"]),
            combined_roll_deg=rec["combined_roll"],
            p1_roll_deg=rec["p1_roll"],
            p2_roll_deg=rec["p2_roll"],
        )
        _, events = game_step(state, pair, cfg.game)
        produced = [event_to_record(e) for e in events]
        expected = logged_events.pop(state.tick, [])
        if produced != expected:
            raise ReplayDivergence(state.tick, expected, produced)
    if logged_events:
        tick = min(logged_events)
        raise ReplayDivergence(tick, logged_events[tick], [])
    return state


# --- metrics -----------------------------------------------------------------


@dataclass(frozen=True)
class SessionMetrics:
    final_score: int | None
    fox_moves: int
    cherries_spawned: int
    cherries_caught: int
    bombs_spawned: int
    bombs_hit: int
    items_exited: int
    pulses: int
    night_catch_rate: float | None
    localization_error_mean: float | None
    localization_error_max: float | None

    def to_dict(self) -> dict:
        return {
            "final_score": self.final_score,
            "fox_moves": self.fox_moves,
            "cherries_spawned": self.cherries_spawned,
            "cherries_caught": self.cherries_caught,
            "bombs_spawned": self.bombs_spawned,
            "bombs_hit": self.bombs_hit,
            "items_exited": self.items_exited,
            "pulses": self.pulses,
            "night_catch_rate": self.night_catch_rate,
            "localization_error_mean": self.localization_error_mean,
            "localization_error_max": self.localization_error_max,
        }

    def format_text(self) -> str:
        lines = [
            f"final score          {self.final_score}",
            f"fox moves            {self.fox_moves}",
            f"cherries caught      {self.cherries_caught} / {self.cherries_spawned} spawned",
            f"bombs hit            {self.bombs_hit} / {self.bombs_spawned} spawned",
            f"items passed through {self.items_exited}",
            f"haptic pulses        {self.pulses}",
        ]
        if self.night_catch_rate is not None:
            lines.append(f"night catch rate     {self.night_catch_rate:.3f}")
        if self.localization_error_mean is not None:
            lines.append(
                f"localization error   mean {self.localization_error_mean:.3e} "
                f"max {self.localization_error_max:.3e}"
            )
        return "\n".join(lines)


def recompute_score(log: SessionLog) -> int:
    """Independent score from the event stream alone (clamped at every hit)."""
    cfg = log.config.game
    score = 0
    for rec in log.events:
        if rec["kind"] == "cherry_caught":
            score += cfg.cherry_points
        elif rec["kind"] == "bomb_hit":
            score = max(0, score - cfg.bomb_penalty)
    return score


def check_entity_conservation(log: SessionLog) -> None:
    """Every spawned id must terminate exactly once; ids are dense from 0."""
    terminal_ids = []
    for rec in log.events:
        if rec["kind"] in ("cherry_caught", "bomb_hit", "item_exited"):
            terminal_ids.append(rec["entity_id"])
    if sorted(terminal_ids) != list(range(len(terminal_ids))):
        raise LogInvariantError(
            f"entity ids are not conserved: {len(terminal_ids)} terminal events, "
            f"ids {sorted(terminal_ids)[:10]}..."
        )


class LogInvariantError(ValueError):
    pass


def metrics(log: SessionLog) -> SessionMetrics:
    from .haptics import ActuatorPair, perceived_position

    cfg = log.config
    cherries_caught = bombs_hit = fox_moves = items_exited = 0
    cherries_spawned = bombs_spawned = 0
    night_cherries = night_caught = 0
    scene = cfg.game.scene_schedule[0][1].value

    for rec in log.events:
        kind = rec["kind"]
        if kind == "scene_changed":
            scene = rec["scene"]
        elif kind == "fox_moved":
            fox_moves += 1
        elif kind == "cherry_caught":
            cherries_caught += 1
            cherries_spawned += 1
            if scene == "night":
                night_cherries += 1
                night_caught += 1
        elif kind == "bomb_hit":
            bombs_hit += 1
            bombs_spawned += 1
        elif kind == "item_exited":
            items_exited += 1
            if rec["entity_kind"] == "cherry":
                cherries_spawned += 1
                if scene == "night":
                    night_cherries += 1
            else:
                bombs_spawned += 1

    final = log.final_score()
    if final is not None:
        recomputed = recompute_score(log)
        if recomputed != final:
            raise LogInvariantError(
                f"score accounting mismatch: events give {recomputed}, log says {final}"
            )

    errors = []
    width = cfg.game.stage_width
    for rec in log.haptic_pulses:
        estimated = perceived_position(
            ActuatorPair(left=rec["left"], right=rec["right"]), cfg.haptics.law
        )
        errors.append(abs(estimated - rec["fox_column"] / (width - 1)))

    return SessionMetrics(
        final_score=final,
        fox_moves=fox_moves,
        cherries_spawned=cherries_spawned,
        cherries_caught=cherries_caught,
        bombs_spawned=bombs_spawned,
        bombs_hit=bombs_hit,
        items_exited=items_exited,
        pulses=len(log.haptic_pulses),
        night_catch_rate=(night_caught / night_cherries) if night_cherries else None,
        localization_error_mean=(sum(errors) / len(errors)) if errors else None,
        localization_error_max=max(errors) if errors else None,
    )


# --- seed sweeps ---------------------------------------------------------------


def sweep(cfg: SessionConfig, seeds: range, out_dir: str | Path) -> dict:
    """Run one session per seed, saving logs and a metrics summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary: dict = {"seeds": [], "mean_final_score": None}
    scores = []
    for seed in seeds:
        log = run_session(replace_seed(cfg, seed))
        log.save(out / f"session_{seed}.log")
        m = metrics(log)
        summary["seeds"].append({"seed": seed, **m.to_dict()})
        if m.final_score is not None:
            scores.append(m.final_score)
    if scores:
        summary["mean_final_score"] = sum(scores) / len(scores)
    return summary


def replace_seed(cfg: SessionConfig, seed: int) -> SessionConfig:
    return replace(cfg, seed=seed)
