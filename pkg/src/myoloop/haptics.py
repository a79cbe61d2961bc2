"""Armband feedback rendering: 5 modules, 3 modalities, 15 actuators.

Tangential position mirrors finger motor position, normal displacement
carries transmitted force, and a vibration bump travelling across the
modules encodes wrist rotation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .plant import WRIST, HandState, PlantConfig
from .signal import FINGERS

MODULES = 5

#: Largest sigma for which a module one unit away from the peak stays below
#: 1% of the peak intensity: exp(-1/(2 s^2)) < 0.01.
SIGMA_LIMIT = 1.0 / math.sqrt(2.0 * math.log(100.0))

DEFAULT_SIGMA = 0.3


@dataclass
class FeedbackFrame:
    """One armband frame: per-module actuator intensities in [0, 1]."""

    tangential: np.ndarray
    normal: np.ndarray
    vibration: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        for name in ("tangential", "normal", "vibration"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (MODULES,):
                raise ConfigError(f"{name} needs {MODULES} module values")
            if ((v < 0) | (v > 1)).any():
                raise ConfigError(f"{name} values must lie in [0, 1]")
            setattr(self, name, v)


def vibration_profile(wrist_pos: float, sigma: float = DEFAULT_SIGMA) -> np.ndarray:
    """Gaussian vibration bump centered at module 4 * wrist_pos.

    sigma must satisfy the 1% separation rule: when one module peaks, its
    neighbors stay below 1% intensity.
    """
    if not 0.0 < sigma <= SIGMA_LIMIT:
        raise ConfigError(
            f"sigma must lie in (0, {SIGMA_LIMIT:.4f}], got {sigma}")
    mu = 4.0 * wrist_pos
    m = np.arange(MODULES, dtype=float)
    return np.exp(-((m - mu) ** 2) / (2.0 * sigma * sigma))


def render(state: HandState, cfg: PlantConfig,
           sigma: float = DEFAULT_SIGMA) -> FeedbackFrame:
    """Map hand state onto the three actuator modalities."""
    normal = (state.torque[:FINGERS] - cfg.tau_spring) / (1.0 - cfg.tau_spring)
    return FeedbackFrame(
        tangential=state.pos[:FINGERS].copy(),
        normal=np.clip(normal, 0.0, 1.0),
        vibration=vibration_profile(float(state.pos[WRIST]), sigma),
        t=state.t,
    )


def decode_wrist(vibration: np.ndarray, sigma: float = DEFAULT_SIGMA) -> float:
    """Invert the vibration bump back to a wrist position estimate.

    Uses the log-ratio of the two strongest adjacent modules, which is
    exact for an untruncated Gaussian profile; degenerate frames (all but
    one module at zero) fall back to the peak module position.
    """
    vibration = np.asarray(vibration, dtype=float)
    m = int(np.argmax(vibration))
    left = vibration[m - 1] if m > 0 else 0.0
    right = vibration[m + 1] if m < MODULES - 1 else 0.0
    other = m + 1 if right >= left else m - 1
    lo, hi = min(m, other), max(m, other)
    if vibration[lo] <= 0.0 or vibration[hi] <= 0.0:
        mu = float(m)
    else:
        mu = (lo + hi) / 2.0 - sigma * sigma * math.log(
            vibration[lo] / vibration[hi])
    return float(np.clip(mu / 4.0, 0.0, 1.0))
