"""Kernel backend selection.

Hot loops live in :mod:`ginar._kernels` in two flavours: numba-compiled
loops and vectorised numpy code. The backend is chosen at import time from
the ``GINAR_BACKEND`` environment variable (``numba`` or ``numpy``); numba is
used when it is importable and the variable is unset. ``set_backend`` swaps
it at runtime, which the tests and the benchmark rely on.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

_VALID = ("numba", "numpy")


def _initial_backend():
    requested = os.environ.get("GINAR_BACKEND", "").strip().lower()
    if requested and requested not in _VALID:
        raise ValueError(f"GINAR_BACKEND must be one of {_VALID}, got {requested!r}")
    if requested == "numpy" or numba is None:
        return "numpy"
    return "numba"


_backend = _initial_backend()


def get_backend():
    return _backend


def set_backend(name):
    """Select ``"numba"`` or ``"numpy"`` kernels; returns the previous choice."""
    global _backend
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    if name == "numba" and numba is None:
        raise RuntimeError("numba is not installed")
    previous, _backend = _backend, name
    return previous


def njit(*args, **kwargs):
    """``numba.njit`` with caching and GIL release on, or an identity decorator without numba."""
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    if numba is None:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    return numba.njit(*args, **kwargs)
