"""Backend selection for the hot kernels.

Every kernel that dominates runtime ships twice: a numba ``@njit`` loop and a
vectorised numpy path.  The numba path is used when numba imports and the
environment variable ``PVK_DISABLE_NUMBA`` is unset (or ``0``).  Both paths
return identical results; the tests check this.
"""

from __future__ import annotations

import contextlib
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None

_TRUTHY = {"1", "true", "yes", "on"}
_backend = (
    "numpy"
    if not HAVE_NUMBA or os.environ.get("PVK_DISABLE_NUMBA", "").lower() in _TRUTHY
    else "numba"
)


def njit(*args, **kwargs):
    """``numba.njit`` with cache and nogil on, or a no-op without numba."""
    if numba is None:
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    return numba.njit(*args, **kwargs)


def backend() -> str:
    return _backend


def use_numba() -> bool:
    return _backend == "numba"


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


@contextlib.contextmanager
def using_backend(name: str):
    previous = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def available_backends() -> list[str]:
    return ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]
