"""Backend selection for the hot kernels.

Set ``SMOOTHDISC_NO_NUMBA=1`` before import to run every kernel as plain
numpy/Python. Without numba installed the fallback is used automatically.
"""
import os

_DISABLED = os.environ.get("SMOOTHDISC_NO_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError
    from numba import njit as _njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


def maybe_njit(fn=None, **opts):
    """``numba.njit`` when the numba backend is active, identity otherwise."""
    def wrap(f):
        if HAS_NUMBA:
            return _njit(cache=True, **opts)(f)
        return f

    if fn is None:
        return wrap
    return wrap(fn)


def backend() -> str:
    return "numba" if HAS_NUMBA else "numpy"


def py_func(fn):
    """Return the uncompiled Python body of a kernel."""
    return getattr(fn, "py_func", fn)
