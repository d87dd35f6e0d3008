"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback.  Setting ``TWOWELL_BACKEND=python`` forces the fallback.
``TWOWELL_THREADS`` caps worker threads (unset or 0 = one per CPU).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

if os.environ.get("TWOWELL_BACKEND", "").lower() == "python" or _ckernels is None:
    BACKEND = "python"
else:
    BACKEND = "cython"

impl = BACKENDS[BACKEND]


def get(name: str | None = None):
    """Kernel module for ``name`` (default: the active backend)."""
    return BACKENDS[name or BACKEND]


def thread_count() -> int:
    try:
        n = int(os.environ.get("TWOWELL_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def conjugate_axis(values: np.ndarray, axis: int, x, s, backend: str | None = None):
    """1-D discrete conjugate of ``values`` along ``axis`` (grid ``x`` -> ``s``).

    Lines are independent, so they are split into contiguous blocks and
    handed to worker threads; results do not depend on the split.
    """
    k = get(backend)
    x = np.ascontiguousarray(x, dtype=float)
    s = np.ascontiguousarray(s, dtype=float)
    moved = np.moveaxis(values, axis, -1)
    shape = moved.shape[:-1]
    lines = np.ascontiguousarray(moved.reshape(-1, x.size))
    out = np.empty((lines.shape[0], s.size))
    threads = min(thread_count(), max(1, lines.shape[0] // 4096))
    if threads <= 1:
        k.conjugate_lines(lines, x, s, out)
    else:
        bounds = np.linspace(0, lines.shape[0], threads + 1).astype(int)
        with ThreadPoolExecutor(threads) as pool:
            list(
                pool.map(
                    lambda ab: k.conjugate_lines(
                        lines[ab[0] : ab[1]], x, s, out[ab[0] : ab[1]]
                    ),
                    zip(bounds[:-1], bounds[1:]),
                )
            )
    return np.moveaxis(out.reshape(shape + (s.size,)), -1, axis)
