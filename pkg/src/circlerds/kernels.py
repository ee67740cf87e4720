"""Kernel backend selection.

The compiled Cython kernels are used when importable; otherwise the numpy
implementation is used. ``CIRCLERDS_BACKEND`` overrides the choice:
``compiled`` (fail if unavailable), ``python`` (force numpy) or ``auto``.
Results are deterministic per backend; the two backends agree to rounding
level but are not guaranteed to be bitwise identical.
"""
from __future__ import annotations

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None


def _select():
    choice = os.environ.get("CIRCLERDS_BACKEND", "auto").strip().lower()
    if choice == "python":
        return _pykernels
    if choice == "compiled":
        if _ckernels is None:
            raise ImportError("CIRCLERDS_BACKEND=compiled but circlerds._ckernels is not built")
        return _ckernels
    if choice != "auto":
        raise ValueError(f"CIRCLERDS_BACKEND must be auto, compiled or python; got {choice!r}")
    return _ckernels if _ckernels is not None else _pykernels


_impl = _select()
BACKEND = _impl.KERNEL_NAME
compose = _impl.compose
track_pair = _impl.track_pair


def available() -> dict:
    """Map of backend name to kernel module for every importable backend."""
    out = {"numpy": _pykernels}
    if _ckernels is not None:
        out["cython"] = _ckernels
    return out
