"""Backend selection for the inner loops.

The compiled extension is used when it imports; otherwise the NumPy
fallback. ``DANEBENCH_BACKEND=python`` forces the fallback.
"""

from __future__ import annotations

import contextlib
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels


def available() -> list[str]:
    return sorted(_BACKENDS)


def _default() -> str:
    forced = os.environ.get("DANEBENCH_BACKEND")
    if forced:
        if forced not in _BACKENDS:
            raise ImportError(f"DANEBENCH_BACKEND={forced!r} not available; have {available()}")
        return forced
    return "compiled" if "compiled" in _BACKENDS else "python"


_active = _default()


def backend() -> str:
    return _active


def impl():
    return _BACKENDS[_active]


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {available()}")
    _active = name


@contextlib.contextmanager
def use_backend(name: str):
    prev = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(prev)
