"""Simulated-user matching tasks: trial loops, MAE scoring, study stats.

Human participants are replaced by parameterized user models. Closed-loop
users perceive the hand through the rendered feedback channels (quantized
to model limited haptic resolution); open-loop users rely on an efference
copy of their own command plus a slow drift. Training trials hand the user
the true plant state, standing in for a visual readout.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .control import (
    CALIBRATION_DOFS,
    ControllerConfig,
    ControllerState,
    Mode,
    PreparedRefs,
    control_step,
    synthesize_references,
)
from .errors import ConfigError, NotCalibrated
from .haptics import FeedbackFrame, decode_wrist, render
from .plant import (
    FINGERS,
    NO_OBJECT,
    HandState,
    PlantConfig,
    VirtualObject,
    grasp_force,
    plant_advance,
)
from .signal import DOF_MOTORS, Dof, MusclePattern, default_pattern, synth_window


class TaskKind(str, Enum):
    POSITION = "position"
    FORCE = "force"


#: DOFs that can exert grasp force (the wrist cannot).
GRASP_DOFS = (Dof.I, Dof.III)


def _dof_order(dofs) -> tuple[Dof, ...]:
    return tuple(d for d in CALIBRATION_DOFS if d in set(dofs))


@dataclass(frozen=True)
class TaskSpec:
    """One block of matching trials against a single task configuration."""

    kind: TaskKind
    dof_set: tuple[Dof, ...]
    trials: int = 10
    trial_duration: float = 5.0
    training: bool = False

    def __post_init__(self) -> None:
        dofs = _dof_order(self.dof_set)
        object.__setattr__(self, "dof_set", dofs)
        if not dofs or len(dofs) > 2:
            raise ConfigError("dof_set must name one or two DOFs")
        if Dof.REST in dofs:
            raise ConfigError("REST is not a targetable DOF")
        if Dof.I in dofs and Dof.III in dofs:
            raise ConfigError("antagonistic DOFs I and III cannot be "
                              "targeted together")
        if self.kind is TaskKind.FORCE:
            bad = [d for d in dofs if d not in GRASP_DOFS]
            if bad:
                raise ConfigError(f"force tasks only target grasping DOFs, "
                                  f"got {bad}")
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if self.trial_duration <= 0:
            raise ConfigError("trial_duration must be positive")


class UserKind(str, Enum):
    CLOSED_LOOP = "closed_loop"
    OPEN_LOOP = "open_loop"


@dataclass(frozen=True)
class UserModel:
    """Proportional-corrector stand-in for a human operator.

    Each control period the user nudges the activation for every targeted
    DOF by gain * (target - percept) plus Gaussian motor noise, clamped to
    [0, 1]. What `percept` is depends on the loop type and trial phase.
    """

    kind: UserKind
    gain: float = 0.5
    resolution: float = 0.05
    noise: float = 0.02
    drift: float = 0.05

    def __post_init__(self) -> None:
        if self.gain < 0:
            raise ConfigError("gain cannot be negative")
        if not 0 < self.resolution < 0.5:
            raise ConfigError("resolution must lie in (0, 0.5)")
        if self.noise < 0:
            raise ConfigError("noise must be nonnegative")
        if self.drift < 0:
            raise ConfigError("drift must be nonnegative")

    @classmethod
    def zero_noise(cls, kind: UserKind = UserKind.CLOSED_LOOP) -> "UserModel":
        """Deterministic variant with fine perceptual resolution."""
        return cls(kind=kind, noise=0.0, resolution=0.01)


@dataclass
class UserState:
    """Mutable per-trial user memory: activation and open-loop drift."""

    activation: np.ndarray
    drift_sign: dict[Dof, float]
    step: int
    n_steps: int

    @classmethod
    def fresh(cls, spec: TaskSpec, n_steps: int,
              rng: np.random.Generator) -> "UserState":
        signs = {d: float(rng.choice([-1.0, 1.0])) for d in spec.dof_set}
        return cls(activation=np.zeros(len(CALIBRATION_DOFS)),
                   drift_sign=signs, step=0, n_steps=n_steps)

    def drift_at(self, user: UserModel, dof: Dof) -> float:
        """Accumulated drift: a linear ramp hitting +-drift at trial end."""
        return self.drift_sign[dof] * user.drift * self.step / self.n_steps


def gen_targets(spec: TaskSpec,
                rng: np.random.Generator) -> list[dict[Dof, float]]:
    """Draw one uniform [0.1, 0.9] target per trial per targeted DOF."""
    return [{d: float(rng.uniform(0.1, 0.9)) for d in spec.dof_set}
            for _ in range(spec.trials)]


def quantize(x: float, q: float) -> float:
    return float(np.round(x / q) * q)


def true_quantity(hand: HandState, plant_cfg: PlantConfig, dof: Dof,
                  kind: TaskKind) -> float:
    """Ground-truth task quantity for one DOF, in [0, 1]."""
    motors = list(DOF_MOTORS[dof])
    if kind is TaskKind.POSITION:
        return float(hand.pos[motors].mean())
    f = grasp_force(hand, plant_cfg) / (1.0 - plant_cfg.tau_spring)
    return float(f[motors].mean())


def haptic_quantity(frame: FeedbackFrame, dof: Dof, kind: TaskKind) -> float:
    """Task quantity as readable from the feedback channels alone."""
    motors = list(DOF_MOTORS[dof])
    if kind is TaskKind.FORCE:
        return float(frame.normal[motors].mean())
    if dof is Dof.II:
        return decode_wrist(frame.vibration)
    return float(frame.tangential[motors].mean())


def user_step(
    user: UserModel,
    targets: dict[Dof, float],
    percepts: dict[Dof, float],
    state: UserState,
    rng: np.random.Generator,
) -> np.ndarray:
    """One corrective update; untargeted DOFs stay at zero effort."""
    a = state.activation
    for dof, target in targets.items():
        i = CALIBRATION_DOFS.index(dof)
        step = user.gain * (target - percepts[dof])
        if user.noise > 0:
            step += rng.normal(0.0, user.noise)
        a[i] = min(1.0, max(0.0, a[i] + step))
    state.step += 1
    return a.copy()


DEFAULT_OBJECT = VirtualObject(closure=np.full(FINGERS, 0.5), stiffness=2.0)


def _forward_estimate(activation: float, kind: TaskKind, obj: VirtualObject,
                      plant_cfg: PlantConfig) -> float:
    """Open-loop forward model: predicted quantity for a held activation.

    Position maps one-to-one; force uses the object parameters the user
    internalized during training.
    """
    if kind is TaskKind.POSITION:
        return activation
    span = 1.0 - plant_cfg.tau_spring
    kappa = float(obj.closure.min())
    f = obj.stiffness * max(0.0, activation - kappa)
    return min(f, span) / span


@dataclass
class TrialTrace:
    """Full per-step record of one trial."""

    spec: TaskSpec
    target: dict[Dof, float]
    control_rate: float
    t: np.ndarray
    activation: np.ndarray
    command: np.ndarray
    pos: np.ndarray
    torque: np.ndarray
    force: np.ndarray
    weights: np.ndarray
    percept: np.ndarray
    distance: np.ndarray

    def rows(self):
        """Yield JSON-able per-step dicts (schema v1) for logging."""
        dofs = [d.value for d in self.spec.dof_set]
        for k in range(len(self.t)):
            yield {
                "v": 1,
                "t": float(self.t[k]),
                "activation": [float(x) for x in self.activation[k]],
                "command": [float(x) for x in self.command[k]],
                "pos": [float(x) for x in self.pos[k]],
                "torque": [float(x) for x in self.torque[k]],
                "force": [float(x) for x in self.force[k]],
                "weights": [float(x) for x in self.weights[k]],
                "percept": dict(zip(dofs, map(float, self.percept[k]))),
                "distance": float(self.distance[k]),
            }


def run_trial(
    spec: TaskSpec,
    target: dict[Dof, float],
    prepared: PreparedRefs | None,
    user: UserModel,
    rng: np.random.Generator,
    *,
    ctrl_cfg: ControllerConfig | None = None,
    plant_cfg: PlantConfig | None = None,
    pattern: MusclePattern | None = None,
    obj: VirtualObject | None = None,
    control_rate: float = 20.0,
    window_samples: int = 40,
) -> TrialTrace:
    """Simulate one trial: user -> EMG -> controller -> plant -> feedback."""
    if prepared is None:
        raise NotCalibrated("run_trial requires calibrated references")
    ctrl_cfg = ctrl_cfg or ControllerConfig()
    plant_cfg = plant_cfg or PlantConfig()
    pattern = pattern or default_pattern()
    if obj is None:
        obj = DEFAULT_OBJECT if spec.kind is TaskKind.FORCE else NO_OBJECT
    n_steps = int(round(spec.trial_duration * control_rate))
    dt_ms = 1000.0 / control_rate
    span = 1.0 - plant_cfg.tau_spring

    hand = HandState()
    cstate = ControllerState.initial(prepared.n_active)
    ustate = UserState.fresh(spec, n_steps, rng)
    frame = render(hand, plant_cfg)

    t = np.empty(n_steps)
    act = np.empty((n_steps, len(CALIBRATION_DOFS)))
    cmd = np.empty((n_steps, hand.pos.size))
    pos = np.empty_like(cmd)
    torque = np.empty_like(cmd)
    force = np.empty((n_steps, FINGERS))
    weights = np.empty((n_steps, prepared.n_active))
    percept_log = np.empty((n_steps, len(spec.dof_set)))
    distance = np.empty(n_steps)

    for k in range(n_steps):
        percepts = {}
        for d in spec.dof_set:
            if spec.training:
                p = true_quantity(hand, plant_cfg, d, spec.kind)
            elif user.kind is UserKind.CLOSED_LOOP:
                p = quantize(haptic_quantity(frame, d, spec.kind),
                             user.resolution)
            else:
                i = CALIBRATION_DOFS.index(d)
                fwd = _forward_estimate(float(ustate.activation[i]),
                                        spec.kind, obj, plant_cfg)
                p = fwd + ustate.drift_at(user, d)
            percepts[d] = p
        a = user_step(user, target, percepts, ustate, rng)
        window = synth_window(a, pattern, window_samples, rng, t=hand.t)
        res = control_step(window, prepared, cstate, ctrl_cfg)
        plant_advance(res.pose, obj, hand, plant_cfg, dt_ms)
        frame = render(hand, plant_cfg)

        t[k] = hand.t
        act[k] = a
        cmd[k] = res.pose
        pos[k] = hand.pos
        torque[k] = hand.torque
        force[k] = grasp_force(hand, plant_cfg) / span
        weights[k] = res.weights
        percept_log[k] = [percepts[d] for d in spec.dof_set]
        distance[k] = res.distance

    return TrialTrace(spec=spec, target=target, control_rate=control_rate,
                      t=t, activation=act, command=cmd, pos=pos,
                      torque=torque, force=force, weights=weights,
                      percept=percept_log, distance=distance)


def mae(trace: TrialTrace, target: float, dof: Dof,
        window_s: float = 0.5) -> float:
    """Mean absolute error for one DOF over the final window, in percent.

    Averages each motor in the DOF's set over the last `window_s` seconds,
    takes |mean - target| per motor, then averages across the set.
    """
    n = max(1, int(round(window_s * trace.control_rate)))
    motors = list(DOF_MOTORS[dof])
    if trace.spec.kind is TaskKind.POSITION:
        finals = trace.pos[-n:, motors].mean(axis=0)
    else:
        finals = trace.force[-n:, motors].mean(axis=0)
    return float(np.abs(finals - target).mean() * 100.0)


def trial_mae(trace: TrialTrace) -> float:
    """Trial score: per-DOF MAE averaged over the targeted DOFs."""
    return float(np.mean([mae(trace, trace.target[d], d)
                          for d in trace.spec.dof_set]))


@dataclass
class TaskResult:
    """Scores for one task block; `mae` holds testing trials only."""

    spec: TaskSpec
    targets: list[dict[Dof, float]]
    mae: list[float]
    training_mae: list[float] = field(default_factory=list)
    traces: list[TrialTrace] = field(default_factory=list)

    def __post_init__(self) -> None:
        if any(m < 0 for m in self.mae + self.training_mae):
            raise ConfigError("MAE cannot be negative")


def run_task(
    spec: TaskSpec,
    prepared: PreparedRefs,
    user: UserModel,
    rng: np.random.Generator,
    *,
    keep_traces: bool = False,
    **trial_kw,
) -> TaskResult:
    """Run one block of trials with freshly drawn targets."""
    targets = gen_targets(spec, rng)
    scores, traces = [], []
    for target in targets:
        trace = run_trial(spec, target, prepared, user, rng, **trial_kw)
        scores.append(trial_mae(trace))
        if keep_traces:
            traces.append(trace)
    if spec.training:
        return TaskResult(spec=spec, targets=targets, mae=[],
                          training_mae=scores, traces=traces)
    return TaskResult(spec=spec, targets=targets, mae=scores, traces=traces)


def mann_whitney_u(sample_a: Sequence[float], sample_b: Sequence[float],
                   method: str = "auto") -> tuple[float, float]:
    """Two-sided Mann-Whitney U test with midrank ties.

    Returns (U of the first sample, two-sided p). Exact p by enumerating
    all group assignments when n_a + n_b <= 12; otherwise a normal
    approximation with tie and continuity corrections. `method` forces
    one path ("exact" or "approx") regardless of sample size.
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ConfigError("both samples must be nonempty")
    if method not in ("auto", "exact", "approx"):
        raise ConfigError(f"unknown method {method!r}")
    n_a, n_b = a.size, b.size
    pooled = np.concatenate([a, b])
    ranks = _midranks(pooled)
    u_a = float(ranks[:n_a].sum() - n_a * (n_a + 1) / 2.0)

    exact = n_a + n_b <= 12 if method == "auto" else method == "exact"
    if exact:
        dist = _exact_u_distribution(ranks, n_a)
        lo = sum(c for u, c in dist.items() if u <= u_a + 1e-9)
        hi = sum(c for u, c in dist.items() if u >= u_a - 1e-9)
        total = sum(dist.values())
        p = min(1.0, 2.0 * min(lo, hi) / total)
        return u_a, p

    mu = n_a * n_b / 2.0
    n = n_a + n_b
    _, counts = np.unique(pooled, return_counts=True)
    tie_term = float(((counts ** 3 - counts).sum()) / (n * (n - 1)))
    var = n_a * n_b / 12.0 * ((n + 1) - tie_term)
    if var <= 0:
        return u_a, 1.0
    diff = u_a - mu
    cc = 0.5 if diff < 0 else (-0.5 if diff > 0 else 0.0)
    z = (diff + cc) / math.sqrt(var)
    p = min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))
    return u_a, p


def _midranks(x: np.ndarray) -> np.ndarray:
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size, dtype=float)
    sx = x[order]
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _exact_u_distribution(ranks: np.ndarray, n_a: int) -> dict[float, int]:
    """Counts of U over every size-n_a assignment of the pooled ranks."""
    from itertools import combinations

    offset = n_a * (n_a + 1) / 2.0
    dist: dict[float, int] = {}
    for subset in combinations(range(ranks.size), n_a):
        u = float(ranks[list(subset)].sum() - offset)
        dist[u] = dist.get(u, 0) + 1
    return dist


# --- Study runner ---------------------------------------------------------

#: Arm name -> (controller mode, user loop type), canonical order.
ARMS: dict[str, tuple[Mode, UserKind]] = {
    "OLDC": (Mode.DISCRETE, UserKind.OPEN_LOOP),
    "CLDC": (Mode.DISCRETE, UserKind.CLOSED_LOOP),
    "OLCC": (Mode.CONTINUOUS, UserKind.OPEN_LOOP),
    "CLCC": (Mode.CONTINUOUS, UserKind.CLOSED_LOOP),
}

#: Default battery: three single- and two dual-DOF position rounds, then
#: force rounds for the two grasping DOFs.
DEFAULT_BATTERY: tuple[tuple[str, tuple[Dof, ...]], ...] = (
    ("position", (Dof.I,)),
    ("position", (Dof.II,)),
    ("position", (Dof.III,)),
    ("position", (Dof.I, Dof.II)),
    ("position", (Dof.II, Dof.III)),
    ("force", (Dof.I,)),
    ("force", (Dof.III,)),
)


@dataclass
class StudyConfig:
    """Everything needed to reproduce a full multi-arm study."""

    arms: tuple[str, ...] = tuple(ARMS)
    seeds_per_arm: int = 10
    seed: int = 0
    trials: int = 10
    training_trials: int = 10
    trial_duration: float = 5.0
    control_rate: float = 20.0
    window_samples: int = 40
    battery: tuple[tuple[str, tuple[Dof, ...]], ...] = DEFAULT_BATTERY
    subject_jitter: float = 0.05
    gain: float = 0.5
    resolution: float = 0.05
    noise: float = 0.02
    drift: float = 0.05
    bonferroni: int | None = None
    save_traces: bool = False

    def __post_init__(self) -> None:
        bad = [a for a in self.arms if a not in ARMS]
        if bad:
            raise ConfigError(f"unknown study arms: {bad}")
        if not self.arms:
            raise ConfigError("study needs at least one arm")
        if self.seeds_per_arm < 1:
            raise ConfigError("seeds_per_arm must be positive")
        self.battery = tuple(
            (str(kind), tuple(Dof(d) for d in dofs))
            for kind, dofs in self.battery)
        for kind, dofs in self.battery:
            TaskSpec(kind=TaskKind(kind), dof_set=dofs, trials=self.trials,
                     trial_duration=self.trial_duration)

    def to_json(self) -> dict:
        return {
            "arms": list(self.arms),
            "seeds_per_arm": self.seeds_per_arm,
            "seed": self.seed,
            "trials": self.trials,
            "training_trials": self.training_trials,
            "trial_duration": self.trial_duration,
            "control_rate": self.control_rate,
            "window_samples": self.window_samples,
            "battery": [[kind, [d.value for d in dofs]]
                        for kind, dofs in self.battery],
            "subject_jitter": self.subject_jitter,
            "gain": self.gain,
            "resolution": self.resolution,
            "noise": self.noise,
            "drift": self.drift,
            "bonferroni": self.bonferroni,
            "save_traces": self.save_traces,
        }

    @classmethod
    def from_json(cls, data: dict) -> "StudyConfig":
        kw = dict(data)
        if "arms" in kw:
            kw["arms"] = tuple(kw["arms"])
        if "battery" in kw:
            kw["battery"] = tuple(
                (kind, tuple(Dof(d) for d in dofs))
                for kind, dofs in kw["battery"])
        known = set(cls.__dataclass_fields__)
        unknown = set(kw) - known
        if unknown:
            raise ConfigError(f"unknown study config keys: {sorted(unknown)}")
        return cls(**kw)


def _round_label(kind: str, dofs: tuple[Dof, ...]) -> str:
    return f"{kind}:{'+'.join(d.value for d in dofs)}"


def run_subject(
    cfg: StudyConfig,
    arm: str,
    subject: int,
    *,
    keep_traces: bool = False,
) -> dict[str, TaskResult]:
    """Calibrate and run the full battery for one simulated subject."""
    mode, ukind = ARMS[arm]
    arm_index = list(ARMS).index(arm)
    rng = np.random.default_rng(
        np.random.SeedSequence([cfg.seed, arm_index, subject]))
    pattern = default_pattern(jitter=cfg.subject_jitter, rng=rng) \
        if cfg.subject_jitter > 0 else default_pattern()
    refs, threshold = synthesize_references(pattern, rng)
    prepared = PreparedRefs(refs, perm_seed=int(rng.integers(2 ** 31)))
    ctrl = ControllerConfig(mode=mode, threshold=threshold,
                            feedback_enabled=(ukind is UserKind.CLOSED_LOOP))
    user = UserModel(kind=ukind, gain=cfg.gain, resolution=cfg.resolution,
                     noise=cfg.noise, drift=cfg.drift)
    results: dict[str, TaskResult] = {}
    for kind, dofs in cfg.battery:
        label = _round_label(kind, dofs)
        common = dict(trials=cfg.trials, trial_duration=cfg.trial_duration)
        kw = dict(ctrl_cfg=ctrl, pattern=pattern,
                  control_rate=cfg.control_rate,
                  window_samples=cfg.window_samples,
                  keep_traces=keep_traces)
        training_scores: list[float] = []
        if cfg.training_trials > 0:
            tspec = TaskSpec(kind=TaskKind(kind), dof_set=dofs,
                             training=True,
                             **{**common, "trials": cfg.training_trials})
            training_scores = run_task(tspec, prepared, user, rng,
                                       **kw).training_mae
        spec = TaskSpec(kind=TaskKind(kind), dof_set=dofs, **common)
        result = run_task(spec, prepared, user, rng, **kw)
        result.training_mae = training_scores
        results[label] = result
    return results


def run_study(cfg: StudyConfig, out: str | Path | None = None) -> dict:
    """Run every arm and seed of the study; return (and write) the report.

    The report carries per-round MAE distributions for every arm plus
    pairwise Mann-Whitney comparisons between the continuous arms (the
    discrete arms complete the same battery but stay out of the
    comparisons). With `out` set, writes report.json, summary.csv, and
    optionally traces.jsonl under that directory.
    """
    labels = [_round_label(kind, dofs) for kind, dofs in cfg.battery]
    arms_report: dict[str, dict] = {}
    per_seed: dict[tuple[str, str], list[float]] = {}
    trace_sink: list[dict] = []

    for arm in cfg.arms:
        rounds: dict[str, dict] = {}
        for label in labels:
            per_seed[(arm, label)] = []
        for subject in range(cfg.seeds_per_arm):
            results = run_subject(cfg, arm, subject,
                                  keep_traces=cfg.save_traces)
            for label, result in results.items():
                med = float(np.median(result.mae))
                per_seed[(arm, label)].append(med)
                entry = rounds.setdefault(label, {
                    "per_seed_median_mae": [],
                    "per_seed_training_median_mae": [],
                })
                entry["per_seed_median_mae"].append(med)
                if result.training_mae:
                    entry["per_seed_training_median_mae"].append(
                        float(np.median(result.training_mae)))
                if cfg.save_traces:
                    for trace in result.traces:
                        for row in trace.rows():
                            row.update(arm=arm, subject=subject, round=label)
                            trace_sink.append(row)
        for label, entry in rounds.items():
            vals = np.array(entry["per_seed_median_mae"])
            entry["median_mae"] = float(np.median(vals))
            entry["q1_mae"] = float(np.percentile(vals, 25))
            entry["q3_mae"] = float(np.percentile(vals, 75))
        arms_report[arm] = {"rounds": rounds}

    continuous = [a for a in cfg.arms
                  if ARMS[a][0] is Mode.CONTINUOUS]
    pairs = [(continuous[i], continuous[j])
             for i in range(len(continuous))
             for j in range(i + 1, len(continuous))]
    raw = []
    for label in labels:
        for arm_a, arm_b in pairs:
            u, p = mann_whitney_u(per_seed[(arm_a, label)],
                                  per_seed[(arm_b, label)])
            raw.append({
                "round": label,
                "arm_a": arm_a,
                "arm_b": arm_b,
                "u": u,
                "p": p,
                "median_a": float(np.median(per_seed[(arm_a, label)])),
                "median_b": float(np.median(per_seed[(arm_b, label)])),
            })
    factor = cfg.bonferroni if cfg.bonferroni is not None else max(1, len(raw))
    for row in raw:
        row["p_adjusted"] = min(1.0, row["p"] * factor)

    report = {
        "v": 1,
        "config": cfg.to_json(),
        "arms": arms_report,
        "comparisons": raw,
        "bonferroni_factor": factor,
    }
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_bytes(
            json.dumps(report, indent=2, sort_keys=True).encode())
        _write_summary_csv(out / "summary.csv", cfg, arms_report)
        if cfg.save_traces:
            with (out / "traces.jsonl").open("w") as fh:
                for row in trace_sink:
                    fh.write(json.dumps(row, sort_keys=True) + "\n")
    return report


def _write_summary_csv(path: Path, cfg: StudyConfig,
                       arms_report: dict) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "arm", "median_mae", "q1_mae", "q3_mae",
                         "n_seeds"])
        for kind, dofs in cfg.battery:
            label = _round_label(kind, dofs)
            for arm in cfg.arms:
                entry = arms_report[arm]["rounds"][label]
                writer.writerow([
                    label, arm,
                    f"{entry['median_mae']:.6f}",
                    f"{entry['q1_mae']:.6f}",
                    f"{entry['q3_mae']:.6f}",
                    len(entry["per_seed_median_mae"]),
                ])
