"""Simulated prosthetic hand: rate-limited motors, springs, object contact.

Quasi-static model. Each of the 6 motors slews toward its commanded
position at a bounded rate; fingers closing onto a present object stop at
the object's closure fraction and develop torque against its stiffness.
Extension springs preload every moving finger, so transmitted grasp force
is the torque beyond the spring threshold.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InvalidSignal
from .signal import FINGERS, MOTORS

WRIST = 5  # motor index; motors 0..4 are thumb through pinky


@dataclass
class PlantConfig:
    """Motor and spring parameters.

    rate: full-range fractions per second; tau_spring: normalized preload
    torque each finger must overcome to transmit force; dt: step in ms.
    """

    rate: float = 1.0
    tau_spring: float = 0.1
    dt_ms: float = 10.0

    def __post_init__(self) -> None:
        if self.rate <= 0:
            raise ConfigError("rate must be > 0")
        if not 0.0 <= self.tau_spring < 1.0:
            raise ConfigError("tau_spring must lie in [0, 1)")
        if self.dt_ms <= 0:
            raise ConfigError("dt_ms must be > 0")


@dataclass
class VirtualObject:
    """Graspable stand-in: per-finger closure fractions and stiffness."""

    closure: np.ndarray = field(default_factory=lambda: np.full(FINGERS, 0.5))
    stiffness: float = 2.0
    present: bool = True

    def __post_init__(self) -> None:
        self.closure = np.asarray(self.closure, dtype=float)
        if self.closure.shape != (FINGERS,):
            raise InvalidSignal(f"closure needs {FINGERS} per-finger values")
        if ((self.closure <= 0) | (self.closure > 1)).any():
            raise InvalidSignal("closure fractions must lie in (0, 1]")
        if self.stiffness < 0:
            raise InvalidSignal("stiffness must be >= 0")


NO_OBJECT = VirtualObject(present=False)


@dataclass
class HandState:
    """Motor positions, torques, and per-finger contact flags."""

    pos: np.ndarray = field(default_factory=lambda: np.zeros(MOTORS))
    torque: np.ndarray = field(default_factory=lambda: np.zeros(MOTORS))
    contact: np.ndarray = field(default_factory=lambda: np.zeros(FINGERS, bool))
    t: float = 0.0


def plant_step(
    target: np.ndarray,
    obj: VirtualObject,
    state: HandState,
    cfg: PlantConfig,
) -> HandState:
    """Advance the hand one cfg.dt_ms step toward the commanded pose.

    Mutates and returns state. Fingers stop at the object's closure
    fraction while it is present; their torque combines the spring preload
    with the object's stiffness reaction to commanded over-closure.
    """
    target = np.asarray(target, dtype=float)
    if target.shape != (MOTORS,):
        raise InvalidSignal(f"target must have {MOTORS} motors")
    if ((target < 0) | (target > 1)).any():
        raise InvalidSignal("target components must lie in [0, 1]")
    max_move = cfg.rate * cfg.dt_ms / 1000.0
    pos = state.pos
    step = np.clip(target - pos, -max_move, max_move)
    pos = np.clip(pos + step, 0.0, 1.0)
    if obj.present:
        pos[:FINGERS] = np.minimum(pos[:FINGERS], obj.closure)
        contact = pos[:FINGERS] >= obj.closure - 1e-12
    else:
        contact = np.zeros(FINGERS, dtype=bool)
    torque = np.zeros(MOTORS)
    moving = pos[:FINGERS] > 0.0
    torque[:FINGERS] = cfg.tau_spring * moving
    if obj.present:
        squeeze = obj.stiffness * np.maximum(0.0, target[:FINGERS] - obj.closure)
        torque[:FINGERS] += np.where(contact, squeeze, 0.0)
    torque = np.clip(torque, 0.0, 1.0)
    state.pos = pos
    state.torque = torque
    state.contact = contact
    state.t += cfg.dt_ms
    return state


def plant_advance(
    target: np.ndarray,
    obj: VirtualObject,
    state: HandState,
    cfg: PlantConfig,
    duration_ms: float,
) -> HandState:
    """Run whole plant steps until duration_ms has elapsed."""
    steps = int(round(duration_ms / cfg.dt_ms))
    for _ in range(max(1, steps)):
        plant_step(target, obj, state, cfg)
    return state


def grasp_force(state: HandState, cfg: PlantConfig) -> np.ndarray:
    """Per-finger force transmitted beyond the spring preload."""
    return np.maximum(0.0, state.torque[:FINGERS] - cfg.tau_spring)
