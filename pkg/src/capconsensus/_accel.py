"""Numba switch.

Set ``CAPCONSENSUS_DISABLE_NUMBA=1`` to run every kernel through its
pure-numpy/Python fallback. The flag is read once at import time.
"""

from __future__ import annotations

import os

_disabled = os.environ.get("CAPCONSENSUS_DISABLE_NUMBA", "0").strip().lower() in ("1", "true", "yes")

try:
    if _disabled:
        raise ImportError("numba disabled by CAPCONSENSUS_DISABLE_NUMBA")
    import numba

    HAS_NUMBA = True
except ImportError:
    numba = None
    HAS_NUMBA = False


def jit(fn):
    """``numba.njit(cache=True)`` when available, identity otherwise.

    The undecorated function stays reachable as ``fn.py_func`` in both modes so
    parity tests and benchmarks can call the interpreted version directly.
    """
    if HAS_NUMBA:
        return numba.njit(cache=True)(fn)
    fn.py_func = fn
    return fn
