"""Kernel backend selection: numba when available, plain interpreter otherwise.

The hot loops in ``kernels.py`` are written as straight Python/NumPy and
compiled with ``numba.njit`` at import time.  Setting the environment
variable ``TRACELAB_DISABLE_NUMBA=1`` (or running without numba installed)
selects the pure NumPy path; every kernel then runs unchanged, just slower.
``benchmarks/bench_kernels.py`` times the two paths against each other.
"""

import os

_flag = os.environ.get("TRACELAB_DISABLE_NUMBA", "").strip().lower()
DISABLE_NUMBA = _flag in ("1", "true", "yes", "on")

try:
    if DISABLE_NUMBA:
        raise ImportError("numba disabled by TRACELAB_DISABLE_NUMBA")
    from numba import njit as _numba_njit

    HAVE_NUMBA = True
except ImportError:
    _numba_njit = None
    HAVE_NUMBA = False


def njit(*args, **kwargs):
    """numba.njit when the numba backend is active, no-op decorator otherwise."""
    if HAVE_NUMBA:
        return _numba_njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]

    def wrap(func):
        return func

    return wrap


def backend_name() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
