"""Backend selection for the compiled kernels.

Set ``HPQFIM_DISABLE_NUMBA=1`` to force the pure-numpy path, e.g. when
debugging or on platforms without numba. Both paths give the same numbers
up to floating-point reordering.
"""
import os

_FLAG = "HPQFIM_DISABLE_NUMBA"

try:  # pragma: no cover - exercised implicitly by the import
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None


def numba_requested():
    return os.environ.get(_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")


HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and numba_requested()


def njit(func):
    """``numba.njit(cache=True)`` when numba is available, else identity."""
    if _numba is None:
        return func
    return _numba.njit(cache=True)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
