"""Discrete and continuous myoelectric controllers.

The discrete baseline classifies the live window against calibrated
references and fires binary pose commands. The continuous controller infers
mixture weights by projected gradient descent on the transport distance,
resolves antagonist conflicts, and smooths the blended pose target
exponentially into the previous command.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from ._backend import kernels
from .errors import ConfigError, InsufficientCalibration, NotCalibrated
from .signal import (
    ANTAGONIST_GROUPS,
    DOF_POSES,
    MOTORS,
    Dof,
    EmgWindow,
    MusclePattern,
    ReferenceActivity,
    record_reference,
    synth_window,
)
from .transport import make_permutations, permute_banks, resample_sorted, w1_1d


class Mode(str, Enum):
    DISCRETE = "discrete"
    CONTINUOUS = "continuous"


@dataclass
class ControllerConfig:
    """Tunables for both controller types.

    feedback_enabled only tags the session (open vs closed loop); the
    controller itself is feedback-agnostic.
    """

    alpha: float = 0.3
    steps: int = 20
    lr: float = 0.5
    h: float = 1e-2
    threshold: float | None = None
    mode: Mode = Mode.CONTINUOUS
    feedback_enabled: bool = True

    def __post_init__(self) -> None:
        self.mode = Mode(self.mode)
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if self.lr <= 0:
            raise ConfigError("lr must be > 0")
        if self.h <= 0:
            raise ConfigError("h must be > 0")
        if self.threshold is not None and self.threshold <= 0:
            raise ConfigError("threshold must be > 0")
        if self.mode is Mode.DISCRETE and self.threshold is None:
            raise ConfigError("DISCRETE mode needs a calibrated threshold")

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha, "steps": self.steps, "lr": self.lr,
            "h": self.h, "threshold": self.threshold,
            "mode": self.mode.value,
            "feedback_enabled": self.feedback_enabled,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ControllerConfig":
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(
                f"unknown controller config keys: {sorted(unknown)}")
        return cls(**doc)


@dataclass
class ControllerState:
    """Per-session mutable state: previous command and warm-start weights."""

    prev_target: np.ndarray
    prev_weights: np.ndarray
    step_index: int = 0

    @classmethod
    def initial(cls, n_refs: int) -> "ControllerState":
        return cls(prev_target=np.zeros(MOTORS), prev_weights=np.zeros(n_refs))

    def __post_init__(self) -> None:
        self.prev_target = np.asarray(self.prev_target, dtype=float)
        self.prev_weights = np.asarray(self.prev_weights, dtype=float)
        if ((self.prev_target < 0) | (self.prev_target > 1)).any():
            raise ConfigError("prev_target components must lie in [0, 1]")


class PreparedRefs:
    """Calibrated references staged for fast per-step evaluation.

    Stacks the non-rest banks into one (r, C, n) array, fixes the session
    permutations, and pre-permutes the banks once so each descent step is a
    weight-sum plus re-sort. The full list (REST included) stays available
    for the discrete classifier.
    """

    def __init__(self, refs: Sequence[ReferenceActivity], perm_seed: int = 0):
        if not refs:
            raise NotCalibrated("no references")
        n = refs[0].n_bank
        C = refs[0].bank.shape[0]
        for r in refs:
            if r.bank.shape != (C, n):
                raise NotCalibrated("reference banks disagree in shape")
        self.all_refs = list(refs)
        self.active = [r for r in refs if r.dof is not Dof.REST]
        if not self.active:
            raise NotCalibrated("need at least one non-rest reference")
        self.banks = np.stack([r.bank for r in self.active])
        self.perms = make_permutations(len(self.active), C, n, perm_seed)
        self.banks_permuted = permute_banks(self.banks, self.perms)
        self.poses = np.stack([r.target_pose for r in self.active])
        self.groups = [r.antagonist_group for r in self.active]
        self.ids = [r.id for r in self.active]
        self.n_bank = n
        self.n_channels = C

    @property
    def n_active(self) -> int:
        return len(self.active)


def prepare_live(window: EmgWindow, n: int) -> np.ndarray:
    """Sort the window per channel and resample to the bank length."""
    live = np.sort(window.samples, axis=1)
    if live.shape[1] == n:
        return live
    return np.stack([resample_sorted(live[c], n) for c in range(live.shape[0])])


def _ref_distance(live: np.ndarray, ref: ReferenceActivity) -> float:
    return float(np.mean([w1_1d(live[c], ref.bank[c]) for c in range(live.shape[0])]))


def classify_discrete(
    live: np.ndarray, refs: Sequence[ReferenceActivity], threshold: float
) -> str | None:
    """Nearest reference below the distance threshold, else None.

    Ties break toward the lowest reference index.
    """
    dists = [_ref_distance(live, r) for r in refs]
    best = int(np.argmin(dists))
    if dists[best] >= threshold:
        return None
    return refs[best].id


def calibrate_threshold(
    refs: Sequence[ReferenceActivity],
    calibration_windows: Mapping[str, Sequence[EmgWindow]],
) -> float:
    """Set the discrete threshold from held-out within-reference spread.

    theta_d = mean + 2 std of the distances from each reference's held-out
    windows to its own bank. Requires >= 3 windows per reference.
    """
    intra = []
    for ref in refs:
        windows = calibration_windows.get(ref.id, ())
        if len(windows) < 3:
            raise InsufficientCalibration(
                f"reference {ref.id!r} needs >= 3 held-out windows")
        for w in windows:
            live = prepare_live(w, ref.n_bank)
            intra.append(_ref_distance(live, ref))
    mu = float(np.mean(intra))
    sigma = float(np.std(intra, ddof=1))
    return mu + 2.0 * sigma


#: Calibration order: the three actions, then the explicit rest reference.
CALIBRATION_DOFS = (Dof.I, Dof.II, Dof.III)


def synthesize_references(
    pat: MusclePattern,
    rng: np.random.Generator,
    n_windows: int = 5,
    window_samples: int = 500,
    n_bank: int = 64,
    n_heldout: int = 3,
) -> tuple[list[ReferenceActivity], float]:
    """Run a synthetic calibration session: references plus threshold.

    Records each action at full activation (plus REST at zero effort),
    then calibrates the discrete threshold on held-out windows. Reference
    order matches the pattern's action rows, REST last.
    """
    refs = []
    heldout: dict[str, list[EmgWindow]] = {}
    actions = list(CALIBRATION_DOFS[: pat.n_actions]) + [Dof.REST]
    for j, dof in enumerate(actions):
        a = np.zeros(pat.n_actions)
        if dof is not Dof.REST:
            a[j] = 1.0
        windows = [synth_window(a, pat, window_samples, rng)
                   for _ in range(n_windows)]
        ref = record_reference(
            windows, dof.value, dof, DOF_POSES[dof], rng,
            antagonist_group=ANTAGONIST_GROUPS.get(dof), n_bank=n_bank)
        refs.append(ref)
        heldout[ref.id] = [synth_window(a, pat, window_samples, rng)
                           for _ in range(n_heldout)]
    threshold = calibrate_threshold(refs, heldout)
    return refs, threshold


def infer_weights(
    live: np.ndarray,
    prepared: PreparedRefs,
    state: ControllerState,
    cfg: ControllerConfig,
) -> np.ndarray:
    """Fit mixture weights to the live distribution by projected descent.

    Warm starts from state.prev_weights; the caller stores the result back.
    """
    w, _ = kernels.descend(
        live, prepared.banks_permuted, state.prev_weights,
        cfg.lr, cfg.steps, cfg.h)
    return w


def resolve_antagonists(w: np.ndarray, prepared: PreparedRefs) -> np.ndarray:
    """Keep only the strongest weight within each antagonist group.

    Grouped actions drive overlapping motors and cannot be active together;
    ungrouped actions pass through. Ties keep the lowest index.
    """
    out = np.array(w, dtype=float, copy=True)
    seen = set()
    for group in prepared.groups:
        if group is None or group in seen:
            continue
        seen.add(group)
        members = [i for i, g in enumerate(prepared.groups) if g == group]
        keep = members[int(np.argmax(out[members]))]
        for i in members:
            if i != keep:
                out[i] = 0.0
    return out


def smooth_target(
    w_resolved: np.ndarray,
    prepared: PreparedRefs,
    state: ControllerState,
    cfg: ControllerConfig,
) -> np.ndarray:
    """Exponentially smooth the blended pose into the previous command.

    P_k = alpha * clamp(sum_i w_i P_i) + (1 - alpha) * P_{k-1}.
    Updates state.prev_target.
    """
    blend = np.clip(w_resolved @ prepared.poses, 0.0, 1.0)
    pose = cfg.alpha * blend + (1.0 - cfg.alpha) * state.prev_target
    state.prev_target = pose
    return pose


@dataclass
class StepResult:
    """Telemetry for one control step."""

    pose: np.ndarray
    weights: np.ndarray
    distance: float
    ref_id: str | None = None
    mode: Mode = Mode.CONTINUOUS


def control_step(
    window: EmgWindow,
    prepared: PreparedRefs,
    state: ControllerState,
    cfg: ControllerConfig,
) -> StepResult:
    """Run one controller update and advance the state."""
    live = prepare_live(window, prepared.n_bank)
    state.step_index += 1
    if cfg.mode is Mode.DISCRETE:
        if cfg.threshold is None:
            raise NotCalibrated("discrete controller has no threshold")
        dists = [_ref_distance(live, r) for r in prepared.all_refs]
        best = int(np.argmin(dists))
        weights = np.zeros(prepared.n_active)
        if dists[best] < cfg.threshold:
            ref = prepared.all_refs[best]
            pose = ref.target_pose.copy()
            ref_id = ref.id
            if ref.id in prepared.ids:
                weights[prepared.ids.index(ref.id)] = 1.0
        else:
            pose = state.prev_target.copy()
            ref_id = None
        state.prev_target = pose
        return StepResult(pose=pose, weights=weights,
                          distance=float(dists[best]), ref_id=ref_id,
                          mode=Mode.DISCRETE)
    w, dist = kernels.descend(
        live, prepared.banks_permuted, state.prev_weights,
        cfg.lr, cfg.steps, cfg.h)
    state.prev_weights = w
    resolved = resolve_antagonists(w, prepared)
    pose = smooth_target(resolved, prepared, state, cfg)
    return StepResult(pose=pose, weights=w, distance=float(dist),
                      mode=Mode.CONTINUOUS)
