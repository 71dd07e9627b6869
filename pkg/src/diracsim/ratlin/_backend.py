"""Kernel backend selection: compiled extension with pure-Python fallback."""

from __future__ import annotations

import os

if os.environ.get("DIRACSIM_PURE"):
    from . import _pure as _impl
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pure as _impl

reduce_int_rows = _impl.reduce_int_rows
BACKEND_NAME = _impl.BACKEND_NAME


def kernel_backend() -> str:
    """Name of the active row-reduction kernel ("speedups" or "pure")."""
    return BACKEND_NAME
