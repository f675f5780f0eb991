"""Kernel backend selection.

Hot loops (bit-sliced circuit evaluation, gather/pack, ARX rounds) are
written once as plain Python over numpy arrays and compiled with numba when
it is available.  Set ``MINIQOT_BACKEND=numpy`` to force the pure-numpy
fallback path (the vectorised implementations in the calling modules).
"""

import os

_requested = os.environ.get("MINIQOT_BACKEND", "numba").strip().lower()

try:
    if _requested == "numpy":
        raise ImportError("numba disabled by MINIQOT_BACKEND")
    from numba import njit as _njit

    NUMBA_AVAILABLE = True
except ImportError:
    _njit = None
    NUMBA_AVAILABLE = False

BACKEND = "numba" if NUMBA_AVAILABLE else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when enabled, otherwise an identity decorator."""
    if NUMBA_AVAILABLE:
        kwargs.setdefault("cache", True)
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def use_numba() -> bool:
    return NUMBA_AVAILABLE
