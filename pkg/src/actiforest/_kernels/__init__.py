"""Kernel selection: compiled routing when available, numpy fallback otherwise.

Set ``ACTIFOREST_PURE_PYTHON=1`` to force the fallback (used by the kernel
benchmark and the equivalence tests).
"""

from __future__ import annotations

import os

from . import py_routing

_FORCE_PURE = os.environ.get("ACTIFOREST_PURE_PYTHON", "") not in ("", "0")

if not _FORCE_PURE:
    try:
        from . import _routing as _compiled
    except ImportError:
        _compiled = None
else:
    _compiled = None

HAVE_COMPILED = _compiled is not None


def backend_name() -> str:
    return "compiled" if HAVE_COMPILED else "python"


if HAVE_COMPILED:
    route_forest = _compiled.route_forest
else:
    route_forest = py_routing.route_forest
