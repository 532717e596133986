"""Hot-loop kernels with a compiled fast path.

The Cython extension ``_ckernels`` is used when it has been built; otherwise
the pure-Python ``_pykernels`` module is used.  Set ``GEOSOCIAL_PURE_PYTHON=1``
to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels as python_backend

try:
    if os.environ.get("GEOSOCIAL_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernels forced by environment")
    from . import _ckernels as compiled_backend  # type: ignore[attr-defined]
except ImportError:
    compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND_NAME = "cython" if compiled_backend is not None else "python"

dijkstra_topk = backend.dijkstra_topk
best_split = backend.best_split

__all__ = [
    "BACKEND_NAME",
    "backend",
    "best_split",
    "compiled_backend",
    "dijkstra_topk",
    "python_backend",
]
