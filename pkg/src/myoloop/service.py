"""Streaming session engine, WebSocket endpoint, and trace replay.

The `Engine` is a synchronous object owning all control-loop state; the
socket layer is a thin shell that feeds it the latest activation and
relays its emitted messages. Session logs record the true rendered
feedback for every step (even when feedback is switched off on the wire),
so a log is always replayable.
"""
from __future__ import annotations

import asyncio
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Sequence

import numpy as np

from .control import (
    ControllerConfig,
    ControllerState,
    Mode,
    PreparedRefs,
    control_step,
    synthesize_references,
)
from .errors import ConfigError, MyoloopError
from .harness import (
    DEFAULT_OBJECT,
    TaskKind,
    TaskSpec,
    TrialTrace,
    gen_targets,
    trial_mae,
)
from .haptics import render
from .plant import (
    FINGERS,
    NO_OBJECT,
    HandState,
    PlantConfig,
    grasp_force,
    plant_advance,
)
from .signal import (
    Dof,
    EmgWindow,
    MusclePattern,
    default_pattern,
    load_references,
    synth_window,
)

MIN_WINDOW_SAMPLES = 8


@dataclass
class SessionConfig:
    """Rates, seeds, and nested configs for one interactive session."""

    control_rate: float = 20.0
    emg_rate: float = 200.0
    window_ms: float = 200.0
    seed: int = 0
    pattern_jitter: float = 0.0
    references: str | None = None
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    plant: PlantConfig = field(default_factory=PlantConfig)

    def __post_init__(self) -> None:
        if self.control_rate <= 0 or self.emg_rate <= 0:
            raise ConfigError("rates must be positive")
        if self.control_rate > self.emg_rate:
            raise ConfigError("control_rate cannot exceed emg_rate")
        if self.window_samples < MIN_WINDOW_SAMPLES:
            raise ConfigError(
                f"window of {self.window_ms} ms at {self.emg_rate} Hz holds "
                f"{self.window_samples} samples; need {MIN_WINDOW_SAMPLES}")

    @property
    def window_samples(self) -> int:
        return int(self.window_ms * self.emg_rate / 1000.0)

    @property
    def samples_per_step(self) -> int:
        return max(1, int(round(self.emg_rate / self.control_rate)))

    @property
    def period_ms(self) -> float:
        return 1000.0 / self.control_rate

    def to_json(self) -> dict:
        return {
            "control_rate": self.control_rate,
            "emg_rate": self.emg_rate,
            "window_ms": self.window_ms,
            "seed": self.seed,
            "pattern_jitter": self.pattern_jitter,
            "references": self.references,
            "controller": self.controller.to_json(),
            "plant": {"rate": self.plant.rate,
                      "tau_spring": self.plant.tau_spring,
                      "dt_ms": self.plant.dt_ms},
        }

    @classmethod
    def from_json(cls, data: dict) -> "SessionConfig":
        kw = dict(data)
        unknown = set(kw) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(
                f"unknown session config keys: {sorted(unknown)}")
        if "controller" in kw:
            kw["controller"] = ControllerConfig.from_json(kw["controller"])
        if "plant" in kw:
            kw["plant"] = PlantConfig(**kw["plant"])
        return cls(**kw)


@dataclass
class _ActiveTask:
    spec: TaskSpec
    targets: list[dict[Dof, float]]
    n_steps: int
    trial: int = 0
    steps_done: int = 0
    pos_rows: list[np.ndarray] = field(default_factory=list)
    force_rows: list[np.ndarray] = field(default_factory=list)


class Engine:
    """Owns the full control-loop state and steps it one period at a time.

    All methods are synchronous and deterministic given the seed and the
    sequence of inbound calls, which keeps the engine unit-testable
    without a socket.
    """

    def __init__(self, cfg: SessionConfig, log: IO[str] | None = None):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        if cfg.pattern_jitter > 0:
            self.pattern = default_pattern(jitter=cfg.pattern_jitter,
                                           rng=self.rng)
        else:
            self.pattern = default_pattern()
        if cfg.references:
            refs, threshold = load_references(cfg.references)
        else:
            refs, threshold = synthesize_references(self.pattern, self.rng)
        self.prepared = PreparedRefs(refs, perm_seed=cfg.seed)
        if cfg.controller.threshold is None:
            self.ctrl = replace(cfg.controller, threshold=threshold)
        else:
            self.ctrl = cfg.controller
        self.cstate = ControllerState.initial(self.prepared.n_active)
        self.hand = HandState()
        self.obj = NO_OBJECT
        self.activation = np.zeros(self.pattern.n_actions)
        self.activation_t = -math.inf
        self.t_ms = 0.0
        self.task: _ActiveTask | None = None
        self.log = log
        self._buf = np.empty((self.pattern.n_channels, 0))

    # -- inbound -----------------------------------------------------------

    def set_activation(self, values: Sequence[float],
                       t: float | None = None) -> None:
        """Latest-wins activation cell; stale timestamps are dropped."""
        arr = np.asarray(values, dtype=float)
        if arr.shape != (self.pattern.n_actions,):
            raise ConfigError(
                f"activation needs {self.pattern.n_actions} values")
        if not np.isfinite(arr).all():
            raise ConfigError("activation values must be finite")
        stamp = self.t_ms if t is None else float(t)
        if stamp < self.activation_t:
            return
        self.activation_t = stamp
        self.activation = np.clip(arr, 0.0, 1.0)

    def set_mode(self, value: str, feedback: bool | None = None) -> None:
        try:
            mode = Mode(value)
        except ValueError:
            raise ConfigError(f"unknown mode {value!r}") from None
        kw = {"mode": mode}
        if feedback is not None:
            kw["feedback_enabled"] = bool(feedback)
        self.ctrl = replace(self.ctrl, **kw)

    def start_task(self, kind: str, dofs: Sequence[str], trials: int = 10,
                   duration: float = 5.0) -> dict:
        """Arm a matching task; returns the first task message."""
        spec = TaskSpec(kind=TaskKind(kind),
                        dof_set=tuple(Dof(d) for d in dofs),
                        trials=int(trials), trial_duration=float(duration))
        n_steps = int(round(spec.trial_duration * self.cfg.control_rate))
        self.task = _ActiveTask(spec=spec,
                                targets=gen_targets(spec, self.rng),
                                n_steps=n_steps)
        self.obj = DEFAULT_OBJECT if spec.kind is TaskKind.FORCE \
            else NO_OBJECT
        self._reset_trial()
        return self._task_message(score=None)

    # -- control loop ------------------------------------------------------

    def step(self) -> list[dict]:
        """Run one control period; returns the messages to stream."""
        cols = synth_window(self.activation, self.pattern,
                            self.cfg.samples_per_step, self.rng,
                            t=self.t_ms).samples
        keep = self.cfg.window_samples
        self._buf = np.concatenate([self._buf, cols], axis=1)[:, -keep:]
        window = EmgWindow(samples=self._buf, t=self.t_ms)
        res = control_step(window, self.prepared, self.cstate, self.ctrl)
        plant_advance(res.pose, self.obj, self.hand, self.cfg.plant,
                      self.cfg.period_ms)
        self.t_ms += self.cfg.period_ms
        frame = render(self.hand, self.cfg.plant)
        force = grasp_force(self.hand, self.cfg.plant) \
            / (1.0 - self.cfg.plant.tau_spring)

        messages = [self._frame_message(res, frame)]
        self._write_log(res, frame, force)
        if self.task is not None:
            messages.extend(self._advance_task(force))
        return messages

    def _frame_message(self, res, frame) -> dict:
        if self.ctrl.feedback_enabled:
            feedback = {"tangential": _floats(frame.tangential),
                        "normal": _floats(frame.normal),
                        "vibration": _floats(frame.vibration)}
        else:
            feedback = {"tangential": [0.0] * FINGERS,
                        "normal": [0.0] * FINGERS,
                        "vibration": [0.0] * FINGERS}
        return {
            "type": "frame",
            "t": self.t_ms,
            "motors": _floats(self.hand.pos),
            "torques": _floats(self.hand.torque),
            "weights": _floats(res.weights),
            "command": _floats(res.pose),
            "feedback": feedback,
        }

    def _task_message(self, score: float | None) -> dict:
        task = self.task
        return {
            "type": "task",
            "kind": task.spec.kind.value,
            "dofs": [d.value for d in task.spec.dof_set],
            "target": {d.value: task.targets[task.trial][d]
                       for d in task.spec.dof_set},
            "trial": task.trial,
            "trials": task.spec.trials,
            "score": score,
        }

    def _advance_task(self, force: np.ndarray) -> list[dict]:
        task = self.task
        task.pos_rows.append(self.hand.pos.copy())
        task.force_rows.append(force.copy())
        task.steps_done += 1
        if task.steps_done < task.n_steps:
            return []
        score = self._score_trial(task)
        done_msg = self._task_message(score=score)
        task.trial += 1
        if task.trial >= task.spec.trials:
            self.task = None
            self.obj = NO_OBJECT
            return [done_msg]
        self._reset_trial()
        return [done_msg, self._task_message(score=None)]

    def _score_trial(self, task: _ActiveTask) -> float:
        n = task.n_steps
        pos = np.stack(task.pos_rows)
        force = np.stack(task.force_rows)
        zeros = np.zeros((n, len(task.spec.dof_set)))
        trace = TrialTrace(
            spec=task.spec, target=task.targets[task.trial],
            control_rate=self.cfg.control_rate,
            t=np.arange(n, dtype=float), activation=np.zeros((n, 3)),
            command=pos, pos=pos, torque=np.zeros_like(pos), force=force,
            weights=np.zeros((n, self.prepared.n_active)),
            percept=zeros, distance=np.zeros(n))
        return trial_mae(trace)

    def _reset_trial(self) -> None:
        task = self.task
        task.steps_done = 0
        task.pos_rows = []
        task.force_rows = []
        self.hand = HandState()
        self.cstate = ControllerState.initial(self.prepared.n_active)

    def _write_log(self, res, frame, force) -> None:
        if self.log is None:
            return
        row = {
            "v": 1,
            "t": self.t_ms,
            "mode": self.ctrl.mode.value,
            "activation": _floats(self.activation),
            "command": _floats(res.pose),
            "pos": _floats(self.hand.pos),
            "torque": _floats(self.hand.torque),
            "force": _floats(force),
            "weights": _floats(res.weights),
            "distance": float(res.distance),
            "feedback": {"tangential": _floats(frame.tangential),
                         "normal": _floats(frame.normal),
                         "vibration": _floats(frame.vibration)},
        }
        self.log.write(json.dumps(row) + "\n")


def _floats(arr) -> list[float]:
    return [float(x) for x in np.asarray(arr).ravel()]


# -- inbound message dispatch ----------------------------------------------

def handle_message(engine: Engine, raw: str | bytes) -> list[dict]:
    """Apply one wire message; returns reply messages (errors included)."""
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        return [{"type": "error", "detail": f"invalid JSON: {exc}"}]
    if not isinstance(data, dict) or "type" not in data:
        return [{"type": "error", "detail": "message must be an object "
                                            "with a 'type' field"}]
    kind = data["type"]
    try:
        if kind == "activation":
            engine.set_activation(data.get("values", []), data.get("t"))
            return []
        if kind == "mode":
            engine.set_mode(data.get("value", ""), data.get("feedback"))
            return []
        if kind == "start_task":
            msg = engine.start_task(
                data.get("kind", "position"), data.get("dofs", []),
                data.get("trials", 10), data.get("duration", 5.0))
            return [msg]
        return [{"type": "error", "detail": f"unknown type {kind!r}"}]
    except (MyoloopError, ValueError, TypeError) as exc:
        return [{"type": "error", "detail": str(exc)}]


# -- socket shell ------------------------------------------------------------

async def serve_forever(
    cfg: SessionConfig,
    host: str = "127.0.0.1",
    port: int = 8765,
    *,
    log_path: str | Path | None = None,
    started: "asyncio.Future[int] | None" = None,
) -> None:
    """Serve one interactive client; runs until cancelled.

    The control loop ticks only while a client is connected (disconnect
    pauses the session; engine state survives for the next client).
    Extra concurrent connections are turned away.
    """
    from websockets.asyncio.server import serve

    log = open(log_path, "w") if log_path else None
    engine = Engine(cfg, log=log)
    busy = False

    async def run_loop(ws) -> None:
        from websockets.exceptions import ConnectionClosed

        loop = asyncio.get_running_loop()
        period = 1.0 / cfg.control_rate
        next_t = loop.time() + period
        try:
            while True:
                await asyncio.sleep(max(0.0, next_t - loop.time()))
                next_t += period
                for msg in engine.step():
                    await ws.send(json.dumps(msg))
                if log is not None:
                    log.flush()
        except ConnectionClosed:
            return

    async def handler(ws) -> None:
        nonlocal busy
        if busy:
            await ws.close(1013, "session already has a client")
            return
        busy = True
        stepper = asyncio.create_task(run_loop(ws))
        try:
            async for raw in ws:
                for reply in handle_message(engine, raw):
                    await ws.send(json.dumps(reply))
        finally:
            stepper.cancel()
            busy = False

    try:
        async with serve(handler, host, port) as server:
            if started is not None:
                bound = server.sockets[0].getsockname()[1]
                started.set_result(bound)
            await asyncio.get_running_loop().create_future()
    finally:
        if log is not None:
            log.close()


# -- replay -------------------------------------------------------------------

def replay(log_path: str | Path,
           plant_cfg: PlantConfig | None = None) -> list[dict]:
    """Recompute the feedback for every logged step from plant state.

    Haptic rendering is a pure function of (pos, torque), so the result
    must match the logged feedback bit for bit.
    """
    plant_cfg = plant_cfg or PlantConfig()
    frames = []
    with open(log_path) as fh:
        for line in fh:
            row = json.loads(line)
            if row.get("v") != 1:
                raise ConfigError(f"unsupported log schema: {row.get('v')}")
            state = HandState(pos=np.array(row["pos"]),
                              torque=np.array(row["torque"]),
                              t=row["t"])
            frame = render(state, plant_cfg)
            frames.append({
                "t": row["t"],
                "feedback": {
                    "tangential": _floats(frame.tangential),
                    "normal": _floats(frame.normal),
                    "vibration": _floats(frame.vibration),
                },
                "logged": row.get("feedback"),
            })
    return frames


def verify_replay(log_path: str | Path,
                  plant_cfg: PlantConfig | None = None) -> int:
    """Check replay fidelity; returns step count, raises on any mismatch."""
    frames = replay(log_path, plant_cfg)
    for i, item in enumerate(frames):
        if item["logged"] is not None and item["logged"] != item["feedback"]:
            raise MyoloopError(f"replay mismatch at step {i}")
    return len(frames)
