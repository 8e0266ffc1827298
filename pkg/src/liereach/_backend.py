"""Pick the kernel implementation at import time.

The compiled extension is preferred.  Set ``LIEREACH_PURE_PYTHON=1`` to force
the NumPy fallback, e.g. for benchmarking or on platforms without a compiler.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _purepy

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

if _compiled is not None and os.environ.get("LIEREACH_PURE_PYTHON", "") in ("", "0"):
    kernels: ModuleType = _compiled
    BACKEND = "compiled"
else:
    kernels = _purepy
    BACKEND = "python"


def get_kernels(name: str | None = None) -> ModuleType:
    """Return the kernel module by name (``"compiled"``, ``"python"``) or the default."""
    if name is None:
        return kernels
    if name == "python":
        return _purepy
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available; rebuild the extension")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def compiled_available() -> bool:
    return _compiled is not None
