"""Selects the compiled kernel extension, falling back to numpy.

Set MYOLOOP_PURE_PYTHON=1 to force the numpy implementation (useful for
benchmarking and for debugging numerical questions).
"""
from __future__ import annotations

import os

if os.environ.get("MYOLOOP_PURE_PYTHON"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]


def backend_name() -> str:
    return kernels.BACKEND
