"""Numba switch.

Set ``SVANISH_NO_JIT=1`` to run every kernel through its pure-numpy path.
Without numba installed the numpy path is used unconditionally.
"""
import os

_flag = os.environ.get("SVANISH_NO_JIT", "").strip().lower()
JIT_REQUESTED = _flag in ("", "0", "false", "no")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_JIT = JIT_REQUESTED and HAVE_NUMBA


def njit(fn):
    """Compile ``fn`` in nopython mode when available, else return it unchanged."""
    if HAVE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn
