"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise, or when
``SOLENOID_WALK_PURE=1`` is set, the numpy fallback takes over.
"""
import os

from . import _fallback

BACKEND = "python"
cos_deficit = _fallback.cos_deficit
walk_canonical = _fallback.walk_canonical

if os.environ.get("SOLENOID_WALK_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "compiled"
        cos_deficit = _kernels.cos_deficit
        walk_canonical = _kernels.walk_canonical

__all__ = ["BACKEND", "cos_deficit", "walk_canonical"]
