"""Microbenchmarks comparing the compiled and numpy descent kernels."""
from __future__ import annotations

import importlib
import time
from statistics import median

import numpy as np

from . import _backend, _kernels_py
from .transport import make_permutations, permute_banks


def _workload(r: int = 3, n_channels: int = 8, n: int = 64, seed: int = 0):
    rng = np.random.default_rng(seed)
    banks = np.sort(rng.gamma(2.0, 0.4, size=(r, n_channels, n)), axis=2)
    perms = make_permutations(r, n_channels, n, seed=seed + 1)
    banks_p = permute_banks(banks, perms)
    live = np.sort(rng.gamma(2.0, 0.5, size=(n_channels, n)), axis=1)
    w0 = np.full(r, 0.5)
    return live, banks_p, w0


def _time(fn, reps: int) -> float:
    """Median wall time per call, in milliseconds."""
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1000.0)
    return median(times)


def available_backends() -> dict[str, object]:
    backends = {"numpy": _kernels_py}
    try:
        backends["cython"] = importlib.import_module("myoloop._kernels")
    except ImportError:
        pass
    return backends


def run_bench(reps: int = 200, steps: int = 20) -> list[dict]:
    """Benchmark descend and distance_batch on every available backend."""
    live, banks_p, w0 = _workload()
    grid = np.random.default_rng(9).uniform(0, 1, size=(40, banks_p.shape[0]))
    rows = []
    for name, mod in available_backends().items():
        t_descend = _time(
            lambda: mod.descend(live, banks_p, w0, 0.5, steps, 1e-2), reps)
        t_batch = _time(lambda: mod.distance_batch(live, banks_p, grid), reps)
        rows.append({
            "backend": name,
            "active": name == _backend.backend_name(),
            "descend_ms": t_descend,
            "distance_batch_ms": t_batch,
        })
    return rows


def format_bench(rows: list[dict]) -> str:
    lines = [f"{'backend':<10} {'descend (ms)':>14} "
             f"{'distance_batch (ms)':>21}  active"]
    for row in rows:
        mark = "*" if row["active"] else ""
        lines.append(f"{row['backend']:<10} {row['descend_ms']:>14.3f} "
                     f"{row['distance_batch_ms']:>21.3f}  {mark}")
    if len(rows) == 2:
        a, b = rows
        ratio = max(a["descend_ms"], b["descend_ms"]) / \
            min(a["descend_ms"], b["descend_ms"])
        fast = min(rows, key=lambda r: r["descend_ms"])["backend"]
        lines.append(f"descend: {fast} backend is {ratio:.2f}x faster")
    return "\n".join(lines)
