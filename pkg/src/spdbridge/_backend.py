"""Kernel backend selection.

The compiled extension is used when it imports; set ``SPDBRIDGE_PURE_PYTHON=1``
to force the numpy fallback.
"""
from __future__ import annotations

import os

from . import _fallback

if os.environ.get("SPDBRIDGE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

bfs_multi = _impl.bfs_multi
pava = _impl.pava
min_update_argmax = _impl.min_update_argmax

__all__ = ["BACKEND", "bfs_multi", "pava", "min_update_argmax"]
