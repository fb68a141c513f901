"""Numba switch.

Hot kernels are decorated with :func:`njit` from this module.  Setting the
environment variable ``BEOLCAMO_NO_NUMBA=1`` (or running without numba
installed) turns the decorator into a no-op so the very same kernel source
runs as plain Python/numpy.  Modules that have a faster vectorised numpy
path for the interpreted case check :data:`USE_NUMBA` themselves.
"""
import os

try:
    import numba as _nb
except ImportError:  # pragma: no cover - numba is a declared dependency
    _nb = None

USE_NUMBA = _nb is not None and os.environ.get("BEOLCAMO_NO_NUMBA", "") in ("", "0")


def njit(*args, **kwargs):
    if USE_NUMBA:
        kwargs.setdefault("cache", True)
        return _nb.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda func: func
