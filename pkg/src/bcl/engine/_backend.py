"""Selects the table-fill kernel: the compiled extension when it imports,
otherwise the pure-Python fallback.  ``BCL_BACKEND=python`` forces the
fallback."""
from __future__ import annotations

import os
from typing import Callable, Optional

from . import _kernel_py

try:  # pragma: no cover - depends on the build
    from . import _kernel as _compiled  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover
    _compiled = None

COMPILED_AVAILABLE = _compiled is not None


def _default() -> str:
    forced = os.environ.get("BCL_BACKEND", "").strip().lower()
    if forced in ("python", "py"):
        return "python"
    if forced in ("cython", "compiled", "c") and not COMPILED_AVAILABLE:
        raise ImportError("BCL_BACKEND requests the compiled kernel but it is not built")
    return "cython" if COMPILED_AVAILABLE else "python"


BACKEND = _default()


def get_fill(name: Optional[str] = None) -> Callable:
    name = BACKEND if name is None else name
    if name == "python":
        return _kernel_py.fill_tables
    if name == "cython":
        if not COMPILED_AVAILABLE:
            raise ImportError("compiled kernel is not built")
        return _compiled.fill_tables
    raise ValueError(f"unknown backend {name!r}")
