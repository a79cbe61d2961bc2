"""Wasserstein transport between sampled EMG distributions.

Distances are 1-D Wasserstein-1 per channel, averaged over channels. Sample
banks stand in for distributions; superposition of references happens by
summing independently permuted banks (summing co-sorted banks would model
perfectly rank-correlated draws and understate the spread of the mixture).

All functions are pure; the caller owns permutation seeds, which makes every
distance evaluation within one control step deterministic and repeatable.
"""
from __future__ import annotations

import numpy as np

from .errors import DimError, EmptySample


def resample_sorted(x: np.ndarray, m: int) -> np.ndarray:
    """Resample a sorted array to m values by quantile interpolation.

    Evaluates the empirical quantile function at midpoint probabilities
    (k + 0.5)/m, interpolating linearly between order statistics.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n == 0:
        raise EmptySample("cannot resample an empty sample")
    if n == m:
        return x
    p_old = (np.arange(n) + 0.5) / n
    p_new = (np.arange(m) + 0.5) / m
    return np.interp(p_new, p_old, x)


def w1_1d(a: np.ndarray, b: np.ndarray) -> float:
    """Wasserstein-1 distance between two sorted 1-D samples.

    Equal-length inputs use the order-statistic form mean |a_k - b_k|;
    unequal lengths are first resampled to the longer length.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise EmptySample("w1_1d needs nonempty samples")
    if a.size != b.size:
        m = max(a.size, b.size)
        a = resample_sorted(a, m)
        b = resample_sorted(b, m)
    return float(np.abs(a - b).mean())


def make_permutations(
    n_refs: int, n_channels: int, n: int, seed: int | np.random.Generator
) -> np.ndarray:
    """Build the (r, C, n) index arrays that shuffle each reference bank.

    One independent permutation per reference and channel. Generated once
    per session so every control step sees the same coupling.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    perms = np.empty((n_refs, n_channels, n), dtype=np.int64)
    for i in range(n_refs):
        for c in range(n_channels):
            perms[i, c] = rng.permutation(n)
    return perms


def permute_banks(banks: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """Apply per-reference, per-channel permutations to stacked banks."""
    banks = np.asarray(banks, dtype=float)
    if banks.shape != perms.shape:
        raise DimError(f"banks {banks.shape} vs permutations {perms.shape}")
    return np.take_along_axis(banks, perms, axis=2)


def _check_mixture(banks: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    banks = np.asarray(banks, dtype=float)
    w = np.asarray(w, dtype=float)
    if banks.ndim != 3:
        raise DimError(f"banks must be (refs, channels, n), got {banks.shape}")
    if w.shape != (banks.shape[0],):
        raise DimError(f"want {banks.shape[0]} weights, got shape {w.shape}")
    return banks, w


def superpose(banks: np.ndarray, w: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """Mix reference banks: shuffle each, weight, sum, re-sort per channel.

    banks: (r, C, n) per-channel sorted reference samples.
    Returns (C, n) sorted samples approximating the distribution of
    sum_i w_i X_i with independent X_i ~ reference i.
    """
    banks, w = _check_mixture(banks, w)
    shuffled = permute_banks(banks, perms)
    mix = np.einsum("r,rcn->cn", w, shuffled)
    return np.sort(mix, axis=1)


def distance(
    live: np.ndarray, banks: np.ndarray, w: np.ndarray, perms: np.ndarray
) -> float:
    """Channel-averaged W1 between live samples and the weighted mixture."""
    live = np.asarray(live, dtype=float)
    banks, w = _check_mixture(banks, w)
    if live.ndim != 2 or live.shape[0] != banks.shape[1]:
        raise DimError(f"live {live.shape} incompatible with banks {banks.shape}")
    mix = superpose(banks, w, perms)
    if live.shape[1] == mix.shape[1]:
        return float(np.abs(live - mix).mean())
    return float(np.mean([w1_1d(live[c], mix[c]) for c in range(live.shape[0])]))


def fd_gradient(
    live: np.ndarray,
    banks: np.ndarray,
    w: np.ndarray,
    perms: np.ndarray,
    h: float = 1e-2,
) -> np.ndarray:
    """Finite-difference gradient of distance with respect to the weights.

    Central differences, collapsing to one-sided at the [0, 1] box edges.
    Every evaluation reuses the same permutations, so the differenced loss
    is a fixed deterministic function of w.
    """
    banks, w = _check_mixture(banks, w)
    g = np.empty_like(w)
    for i in range(w.size):
        hi, lo = w.copy(), w.copy()
        hi[i] = min(1.0, w[i] + h)
        lo[i] = max(0.0, w[i] - h)
        g[i] = (distance(live, banks, hi, perms) - distance(live, banks, lo, perms)) / (
            hi[i] - lo[i]
        )
    return g
