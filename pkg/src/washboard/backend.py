"""Kernel backend selection: compiled extension with a pure-NumPy fallback.

The compiled module is preferred when importable; set WASHBOARD_BACKEND to
"numpy" (or "cython") before import to force one side explicitly, e.g. when
benchmarking or debugging a discrepancy.
"""
from __future__ import annotations

import os

from . import _kernels_py
from .errors import InvalidConfig

try:
    from . import _kernels as _compiled
except ImportError:          # pragma: no cover - depends on the build
    _compiled = None

_ALIASES = {
    "numpy": "numpy", "python": "numpy", "py": "numpy", "fallback": "numpy",
    "cython": "cython", "compiled": "cython", "c": "cython",
}

__all__ = ["active_backend", "available_backends", "resolve"]


def available_backends() -> tuple:
    return ("numpy",) if _compiled is None else ("cython", "numpy")


def resolve(name: str | None = None):
    """Return the kernel module for ``name`` (default: best available)."""
    if name is None:
        return _compiled if _compiled is not None else _kernels_py
    key = _ALIASES.get(str(name).strip().lower())
    if key is None:
        raise InvalidConfig(f"unknown backend {name!r}; "
                            f"choose from {sorted(set(_ALIASES.values()))}")
    if key == "numpy":
        return _kernels_py
    if _compiled is None:
        raise InvalidConfig("compiled backend requested but the extension "
                            "module is not importable")
    return _compiled


_env = os.environ.get("WASHBOARD_BACKEND", "").strip()
_default = resolve(_env) if _env else resolve(None)


def default_kernels():
    """Kernel module honoring the WASHBOARD_BACKEND environment override."""
    return _default


def active_backend() -> str:
    """Name of the backend :func:`default_kernels` hands out."""
    return "cython" if _compiled is not None and _default is _compiled else "numpy"
