"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; setting
``ARIS_BEAMPATTERN_PURE_PYTHON=1`` forces the numpy fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
dual_roots = _pykernels.dual_roots

if not os.environ.get("ARIS_BEAMPATTERN_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        dual_roots = _ckernels.dual_roots

__all__ = ["BACKEND", "dual_roots"]
