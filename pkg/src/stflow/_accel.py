"""Numba acceleration toggle.

The hot assembly kernels in :mod:`stflow.kernels` are written as plain
loop-based numpy code and decorated with :func:`jit`.  By default the
decorator is numba's ``njit``; setting the environment variable
``STFLOW_DISABLE_NUMBA=1`` (before import) turns :func:`jit` into a
no-op so the identical code runs as pure numpy/Python.  This gives a
slow but dependency-free reference path and a way to debug kernels
with ordinary tracebacks.
"""

import os

NUMBA_DISABLED = os.environ.get("STFLOW_DISABLE_NUMBA", "0") not in ("0", "", "false")

if not NUMBA_DISABLED:
    try:
        import numba
    except ImportError:  # pragma: no cover
        NUMBA_DISABLED = True

if NUMBA_DISABLED:

    def jit(func=None, **kwargs):
        if func is None:
            return lambda f: f
        return func

else:

    def jit(func=None, **kwargs):
        kwargs.setdefault("cache", True)
        kwargs.setdefault("fastmath", False)
        if func is None:
            return lambda f: numba.njit(f, **kwargs)
        return numba.njit(func, **kwargs)


def using_numba():
    """True when kernels are compiled with numba."""
    return not NUMBA_DISABLED
