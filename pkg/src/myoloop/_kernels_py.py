"""Vectorized numpy implementations of the inner-loop kernels.

Fallback twin of the compiled extension in _kernels.pyx; same signatures,
same math. Banks arrive pre-permuted, so mixing is weight-sum plus re-sort.
"""
from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def distance_batch(live: np.ndarray, banks_p: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Channel-averaged W1 from live samples to each weight row of W.

    live: (C, n) sorted; banks_p: (r, C, n) permuted banks; W: (m, r).
    Returns (m,) distances.
    """
    mixes = np.einsum("mr,rcn->mcn", W, banks_p)
    mixes.sort(axis=2)
    return np.abs(mixes - live[None]).mean(axis=(1, 2))


def descend(
    live: np.ndarray,
    banks_p: np.ndarray,
    w0: np.ndarray,
    lr: float = 0.5,
    steps: int = 20,
    h: float = 1e-2,
) -> tuple[np.ndarray, float]:
    """Projected finite-difference gradient descent on the mixture weights.

    Per step: central-difference gradient (one-sided at the [0,1] box),
    then w <- clamp(w - lr * g). Returns final weights and their distance.
    """
    w = np.array(w0, dtype=float, copy=True)
    r = w.size
    idx = np.arange(r)
    for _ in range(steps):
        W = np.tile(w, (2 * r, 1))
        W[2 * idx, idx] = np.minimum(1.0, w + h)
        W[2 * idx + 1, idx] = np.maximum(0.0, w - h)
        d = distance_batch(live, banks_p, W)
        denom = W[2 * idx, idx] - W[2 * idx + 1, idx]
        g = (d[0::2] - d[1::2]) / denom
        w = np.clip(w - lr * g, 0.0, 1.0)
    final = float(distance_batch(live, banks_p, w[None, :])[0])
    return w, final
