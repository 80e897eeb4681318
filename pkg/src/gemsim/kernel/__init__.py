"""Stepping-kernel backend selection.

The hot loop (4th-order stepping of the polarization array coupled to the
cumulative field sweep) exists twice: a compiled Cython extension and a
NumPy fallback with identical semantics.  The compiled one is preferred
when importable; set GEMSIM_KERNEL=py or =c to force a choice.
"""
from __future__ import annotations

import importlib
import os
import warnings

from . import _pykernel

_FORCED = os.environ.get("GEMSIM_KERNEL", "").strip().lower()

_ckernel = None
if _FORCED != "py":
    try:
        _ckernel = importlib.import_module("._ckernel", __name__)
    except ImportError:
        _ckernel = None
        if _FORCED == "c":
            raise
        warnings.warn(
            "gemsim compiled kernel not available; using the NumPy fallback",
            RuntimeWarning,
            stacklevel=2,
        )

if _ckernel is not None:
    BACKEND = "c"
    advance_segment = _ckernel.advance_segment
else:
    BACKEND = "py"
    advance_segment = _pykernel.advance_segment

# the field sweep is cheap; the NumPy version serves both backends
field_sweep = _pykernel.field_sweep


def get_backend(name: str | None = None):
    """Return (backend_name, advance_segment) for `name` or the default."""
    if name in (None, "", "auto"):
        return BACKEND, advance_segment
    if name == "py":
        return "py", _pykernel.advance_segment
    if name == "c":
        if _ckernel is None:
            raise ImportError("compiled kernel not built")
        return "c", _ckernel.advance_segment
    raise ValueError(f"unknown kernel backend {name!r}")
