"""Rectified surface-EMG modeling.

Covers the signal side of the control engine: windows of rectified EMG
intensities from an 8-electrode circumferential armband, synthetic window
generation by linear superposition of per-action muscle patterns, per-channel
Gaussian kernel density estimates, and calibration of reference activities
(the pre-recorded muscle patterns the decoder matches against).

Conventions: intensities are dimensionless, normalized so a fully activated
single action has per-channel scale about 1 on its dominant electrodes, with
a noise-floor scale of 0.05. Rectified amplitude is modeled as a scaled
half-normal; superposition acts on the scale parameter.
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

from .errors import InsufficientCalibration, InvalidSignal, TooFewSamples

CHANNELS = 8
MOTORS = 6
FINGERS = 5

#: E[|Z|] for Z ~ N(0,1); mean of a unit-scale half-normal.
HALF_NORMAL_MEAN = math.sqrt(2.0 / math.pi)

BANDWIDTH_FLOOR = 1e-3


class Dof(str, Enum):
    """Controllable degrees of freedom plus the explicit rest action."""

    I = "I"  # power grip: all five finger motors
    II = "II"  # wrist pronation/supination
    III = "III"  # tripod grip: thumb, index, middle
    REST = "REST"


#: Motor indices driven by each DOF (order: thumb, index, middle, ring, pinky, wrist).
DOF_MOTORS = {
    Dof.I: (0, 1, 2, 3, 4),
    Dof.II: (5,),
    Dof.III: (0, 1, 2),
}

#: Full-activation motor pose for each DOF.
DOF_POSES = {
    Dof.I: np.array([1.0, 1.0, 1.0, 1.0, 1.0, 0.0]),
    Dof.II: np.array([0.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
    Dof.III: np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0]),
    Dof.REST: np.zeros(6),
}

#: Grasping DOFs share overlapping motors and are mutually exclusive.
ANTAGONIST_GROUPS = {Dof.I: "grasp", Dof.II: None, Dof.III: "grasp"}


def channel_angles(n_channels: int = CHANNELS) -> np.ndarray:
    """Circumferential electrode positions, 2*pi*c/C radians."""
    return 2.0 * np.pi * np.arange(n_channels) / n_channels


@dataclass
class EmgWindow:
    """One control-step window of rectified EMG intensities.

    samples: (C, N) nonnegative intensities, channel-major.
    channel_angle: (C,) electrode angles in radians.
    t: timestamp in milliseconds.
    """

    samples: np.ndarray
    channel_angle: np.ndarray = field(default=None)  # type: ignore[assignment]
    t: float = 0.0

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 2:
            raise InvalidSignal(f"expected (C, N) samples, got shape {self.samples.shape}")
        if not np.isfinite(self.samples).all():
            raise InvalidSignal("window contains non-finite samples")
        if (self.samples < 0).any():
            raise InvalidSignal("window contains negative (unrectified) samples")
        if self.channel_angle is None:
            self.channel_angle = channel_angles(self.samples.shape[0])
        else:
            self.channel_angle = np.asarray(self.channel_angle, dtype=float)
            if self.channel_angle.shape != (self.samples.shape[0],):
                raise InvalidSignal("channel_angle length must match channel count")

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]


def rectify(raw: np.ndarray, t: float = 0.0) -> EmgWindow:
    """Full-wave rectify a raw (C, N) signal into an EmgWindow.

    Raises InvalidSignal on non-finite input.
    """
    raw = np.asarray(raw, dtype=float)
    if not np.isfinite(raw).all():
        raise InvalidSignal("raw signal contains non-finite values")
    return EmgWindow(samples=np.abs(raw), t=t)


@dataclass
class MusclePattern:
    """Spatial gain matrix mapping action efforts to per-channel EMG scale.

    M: (r, C) nonnegative gains, one row per non-rest action.
    base: noise-floor scale added to every channel.
    """

    M: np.ndarray
    base: float = 0.05

    def __post_init__(self) -> None:
        self.M = np.asarray(self.M, dtype=float)
        if self.M.ndim != 2:
            raise InvalidSignal("pattern matrix must be (actions, channels)")
        if (self.M < 0).any():
            raise InvalidSignal("pattern gains must be nonnegative")
        if not (self.M.max(axis=1) > 0).all():
            raise InvalidSignal("every action row needs at least one positive gain")
        if self.base <= 0:
            raise InvalidSignal("noise-floor base must be > 0")

    @property
    def n_actions(self) -> int:
        return self.M.shape[0]

    @property
    def n_channels(self) -> int:
        return self.M.shape[1]

    def scales(self, a: np.ndarray) -> np.ndarray:
        """Per-channel half-normal scale for activation vector a."""
        a = np.asarray(a, dtype=float)
        if a.shape != (self.n_actions,):
            raise InvalidSignal(f"activation must have shape ({self.n_actions},)")
        return self.base + a @ self.M


def cosine_rows(M: np.ndarray, i: int, j: int) -> float:
    """Cosine similarity between two pattern rows."""
    u, v = M[i], M[j]
    return float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))


# Electrode-ring centers for the three default actions. The grasping actions
# (rows 0 and 2) sit on opposite sides of the forearm so their spatial
# profiles barely overlap; the wrist action sits between them.
_DEFAULT_CENTERS = (1.0, 3.5, 6.0)
_DEFAULT_WIDTH = 0.8


def default_pattern(
    n_actions: int = 3,
    n_channels: int = CHANNELS,
    base: float = 0.05,
    jitter: float = 0.0,
    rng: np.random.Generator | None = None,
) -> MusclePattern:
    """Build the default three-action muscle pattern.

    Each action has a Gaussian spatial profile (in circular channel distance)
    peaking at 1.0 on its center electrode. With jitter > 0 the gains get
    per-element lognormal perturbations, modeling anatomical variation
    between subjects; requires an rng.
    """
    if n_actions > len(_DEFAULT_CENTERS):
        raise InvalidSignal("default pattern supports at most 3 actions")
    c = np.arange(n_channels, dtype=float)
    rows = []
    for center in _DEFAULT_CENTERS[:n_actions]:
        d = np.abs(c - center)
        d = np.minimum(d, n_channels - d)  # circular distance
        rows.append(np.exp(-0.5 * (d / _DEFAULT_WIDTH) ** 2))
    M = np.vstack(rows)
    if jitter > 0:
        if rng is None:
            raise InvalidSignal("jitter requires an rng")
        M = M * np.exp(rng.normal(0.0, jitter, size=M.shape))
    return MusclePattern(M=M, base=base)


def synth_window(
    a: np.ndarray,
    pat: MusclePattern,
    n_samples: int,
    rng: np.random.Generator,
    t: float = 0.0,
) -> EmgWindow:
    """Generate a rectified window by superposing action contributions.

    Each sample on channel c is |z| * s_c with z standard normal and
    s_c = base + sum_i a_i * M[i, c]; superposition happens in the scale
    (amplitude) domain. Deterministic given the rng state.
    """
    scales = pat.scales(a)
    z = rng.standard_normal((pat.n_channels, n_samples))
    return EmgWindow(samples=np.abs(z) * scales[:, None], t=t)


@dataclass
class KdeModel:
    """Per-channel Gaussian KDE over rectified intensities.

    support: (C, N) sample intensities backing each channel's density.
    bandwidth: (C,) kernel widths, all > 0.
    """

    support: np.ndarray
    bandwidth: np.ndarray

    def __post_init__(self) -> None:
        self.support = np.asarray(self.support, dtype=float)
        self.bandwidth = np.asarray(self.bandwidth, dtype=float)
        if (self.bandwidth <= 0).any():
            raise InvalidSignal("bandwidths must be positive")

    @property
    def n_channels(self) -> int:
        return self.support.shape[0]

    def pdf(self, channel: int, x: np.ndarray) -> np.ndarray:
        """Density of the given channel evaluated at x (scalar or array)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        s = self.support[channel]
        h = self.bandwidth[channel]
        z = (x[:, None] - s[None, :]) / h
        out = np.exp(-0.5 * z * z).mean(axis=1) / (h * math.sqrt(2.0 * math.pi))
        return out

    def sample(self, channel: int, size: int, rng: np.random.Generator) -> np.ndarray:
        """Kernel-smoothed bootstrap draw, clamped at the rectification floor 0."""
        s = self.support[channel]
        idx = rng.integers(0, s.size, size=size)
        draws = s[idx] + self.bandwidth[channel] * rng.standard_normal(size)
        return np.maximum(draws, 0.0)


def silverman_bandwidth(x: np.ndarray) -> float:
    """Robust rule-of-thumb bandwidth: 0.9 * min(std, IQR/1.34) * N^(-1/5).

    Floored at 1e-3 so constant-valued channels keep a usable kernel.
    """
    n = x.size
    sigma = float(np.std(x, ddof=1)) if n > 1 else 0.0
    q75, q25 = np.percentile(x, [75.0, 25.0])
    iqr = float(q75 - q25)
    spread = min(sigma, iqr / 1.34)
    return max(0.9 * spread * n ** (-0.2), BANDWIDTH_FLOOR)


def fit_kde(window: EmgWindow) -> KdeModel:
    """Fit independent per-channel Gaussian KDEs to a window.

    Raises TooFewSamples below 8 samples per channel.
    """
    if window.n_samples < 8:
        raise TooFewSamples(f"need at least 8 samples, got {window.n_samples}")
    bw = np.array([silverman_bandwidth(ch) for ch in window.samples])
    return KdeModel(support=window.samples.copy(), bandwidth=bw)


@dataclass
class ReferenceActivity:
    """A calibrated reference: density model, sample bank, and motor pose.

    bank: (C, n_bank) per-channel sample intensities, sorted ascending.
    target_pose: (6,) motor positions commanded at full activation.
    """

    id: str
    kde: KdeModel
    bank: np.ndarray
    target_pose: np.ndarray
    dof: Dof
    antagonist_group: str | None = None

    def __post_init__(self) -> None:
        self.bank = np.asarray(self.bank, dtype=float)
        self.target_pose = np.asarray(self.target_pose, dtype=float)
        self.dof = Dof(self.dof)
        if self.bank.ndim != 2:
            raise InvalidSignal("bank must be (channels, n_bank)")
        if (self.bank < 0).any():
            raise InvalidSignal("bank values must be nonnegative")
        if (np.diff(self.bank, axis=1) < 0).any():
            raise InvalidSignal("bank channels must be sorted ascending")
        if self.target_pose.shape != (MOTORS,):
            raise InvalidSignal(f"target_pose must have {MOTORS} motors")
        if ((self.target_pose < 0) | (self.target_pose > 1)).any():
            raise InvalidSignal("target_pose components must lie in [0, 1]")
        if self.dof is Dof.REST:
            if self.target_pose.any():
                raise InvalidSignal("REST reference must target the all-open pose")
            if self.antagonist_group:
                raise InvalidSignal("REST reference cannot join an antagonist group")

    @property
    def n_bank(self) -> int:
        return self.bank.shape[1]


def record_reference(
    windows: Sequence[EmgWindow],
    id: str,
    dof: Dof,
    target_pose: np.ndarray,
    rng: np.random.Generator,
    antagonist_group: str | None = None,
    n_bank: int = 64,
) -> ReferenceActivity:
    """Calibrate a reference from repeated activity windows.

    Pools the windows, fits the KDE, then freezes a bank of n_bank
    kernel-smoothed bootstrap samples per channel (sorted ascending) that
    downstream transport code treats as the reference distribution.

    Raises InsufficientCalibration with fewer than 3 windows.
    """
    if len(windows) < 3:
        raise InsufficientCalibration(f"need >= 3 windows, got {len(windows)}")
    pooled = np.concatenate([w.samples for w in windows], axis=1)
    kde = fit_kde(EmgWindow(samples=pooled, t=windows[0].t))
    bank = np.empty((kde.n_channels, n_bank))
    for c in range(kde.n_channels):
        bank[c] = np.sort(kde.sample(c, n_bank, rng))
    return ReferenceActivity(
        id=id,
        kde=kde,
        bank=bank,
        target_pose=target_pose,
        dof=dof,
        antagonist_group=antagonist_group,
    )


def save_references(
    refs: Sequence[ReferenceActivity],
    path: str | Path,
    threshold: float | None = None,
) -> None:
    """Write a reference set to JSON (bank + bandwidth per reference)."""
    doc = {
        "v": 1,
        "threshold": threshold,
        "references": [
            {
                "id": r.id,
                "dof": r.dof.value,
                "antagonist_group": r.antagonist_group,
                "target_pose": r.target_pose.tolist(),
                "bank": r.bank.tolist(),
                "bandwidth": r.kde.bandwidth.tolist(),
            }
            for r in refs
        ],
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True))


def load_references(path: str | Path) -> tuple[list[ReferenceActivity], float | None]:
    """Load a reference set written by save_references.

    The stored bank doubles as KDE support after a round-trip; the full
    calibration support is not persisted.
    """
    doc = json.loads(Path(path).read_text())
    refs = []
    for entry in doc["references"]:
        bank = np.asarray(entry["bank"], dtype=float)
        kde = KdeModel(support=bank, bandwidth=np.asarray(entry["bandwidth"], dtype=float))
        refs.append(
            ReferenceActivity(
                id=entry["id"],
                kde=kde,
                bank=bank,
                target_pose=np.asarray(entry["target_pose"], dtype=float),
                dof=Dof(entry["dof"]),
                antagonist_group=entry["antagonist_group"],
            )
        )
    return refs, doc.get("threshold")


def write_windows_csv(windows: Sequence[EmgWindow], path: str | Path) -> None:
    """Log windows to CSV, one row per sample: t, ch0..ch{C-1}."""
    if not windows:
        raise InvalidSignal("nothing to write")
    n_channels = windows[0].n_channels
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"ch{c}" for c in range(n_channels)])
        for w in windows:
            for k in range(w.n_samples):
                writer.writerow([w.t] + [float(v) for v in w.samples[:, k]])
