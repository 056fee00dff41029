"""Optional numba acceleration.

Set ``PWLSDS_DISABLE_NUMBA=1`` to force the pure-numpy kernels.  Without
numba installed the numpy kernels are always used.
"""

from __future__ import annotations

import os

ENV_FLAG = "PWLSDS_DISABLE_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False


def numba_enabled() -> bool:
    """Read at call time so tests and benchmarks can flip the flag."""
    if not HAVE_NUMBA:
        return False
    return os.environ.get(ENV_FLAG, "").strip().lower() in ("", "0", "false", "no")


def resolve_backend(backend: str | None) -> str:
    if backend is None:
        return "numba" if numba_enabled() else "numpy"
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


def njit(**kwargs):
    """``numba.njit`` when available, else the identity decorator."""

    def wrap(fn):
        if HAVE_NUMBA:
            return numba.njit(**kwargs)(fn)
        return fn

    return wrap
