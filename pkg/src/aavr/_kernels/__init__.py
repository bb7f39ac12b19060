"""Kernel backend selection.

Two interchangeable implementations of the hot loops live here: the
compiled extension ``_native`` (built from ``_native.pyx``) and the pure
NumPy module ``pure``.  The compiled one is preferred when importable;
set ``AAVR_PURE=1`` in the environment to force the fallback.  Both
produce bit-identical results.
"""

from __future__ import annotations

import contextlib
import os

from . import pure

_BACKENDS = {"pure": pure}

if os.environ.get("AAVR_PURE", "") != "1":
    try:
        from . import _native
        _BACKENDS["native"] = _native
    except ImportError:
        pass

_active = "native" if "native" in _BACKENDS else "pure"


def backend_name() -> str:
    """Name of the backend currently in use ('native' or 'pure')."""
    return _active


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def active():
    """The active backend module (exposes simplex_loop and pb_convolve)."""
    return _BACKENDS[_active]


def use(name: str) -> str:
    """Switch backends; returns the previous backend name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available (have {available_backends()})")
    previous = _active
    _active = name
    return previous


@contextlib.contextmanager
def forced(name: str):
    """Context manager pinning the backend. Not thread-safe."""
    previous = use(name)
    try:
        yield _BACKENDS[name]
    finally:
        use(previous)
