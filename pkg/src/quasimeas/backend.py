"""Selects the integration kernel: compiled extension or pure-numpy fallback.

The compiled module is preferred when importable; set QUASIMEAS_BACKEND to
"python" or "compiled" to force a choice (the latter raises if the extension
is missing).
"""

from __future__ import annotations

import os

from . import _dopri_py

try:
    from . import _dopri  # type: ignore[attr-defined]

    HAVE_COMPILED = True
except ImportError:
    _dopri = None
    HAVE_COMPILED = False


def _select():
    choice = os.environ.get("QUASIMEAS_BACKEND", "auto").lower()
    if choice == "python":
        return _dopri_py
    if choice == "compiled":
        if not HAVE_COMPILED:
            raise ImportError("QUASIMEAS_BACKEND=compiled but the extension is not built")
        return _dopri
    return _dopri if HAVE_COMPILED else _dopri_py


def active_backend() -> str:
    return "compiled" if _select() is _dopri and _dopri is not None else "python"


def integrate_grid(*args, **kwargs):
    return _select().integrate_grid(*args, **kwargs)
