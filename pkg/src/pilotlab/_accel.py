"""Numba switch for the hot training loops.

Set ``PILOTLAB_NUMBA=0`` before import to run every kernel as plain numpy
(identical source, interpreted).  When numba is missing the fallback is used
silently.
"""

import os

_flag = os.environ.get("PILOTLAB_NUMBA", "1").strip().lower()
_requested = _flag not in ("0", "false", "no", "off", "")

try:
    if not _requested:
        raise ImportError
    import numba

    NUMBA_ENABLED = True
except ImportError:
    numba = None
    NUMBA_ENABLED = False


def njit(fn):
    """``numba.njit(cache=True)`` when enabled, identity otherwise."""
    if NUMBA_ENABLED:
        return numba.njit(cache=True)(fn)
    return fn


def backend_name():
    return "numba" if NUMBA_ENABLED else "numpy"
