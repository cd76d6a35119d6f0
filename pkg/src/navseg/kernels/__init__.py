"""Hot projection/z-buffer kernels with a compiled core and a NumPy fallback.

The compiled extension and the fallback implement the same IEEE arithmetic in
the same order, so results are bit-identical; which one is active is decided
once at import. Set NAVSEG_PURE_PYTHON=1 to force the fallback.
"""

import os

from . import _py

if os.environ.get("NAVSEG_PURE_PYTHON", "") not in ("", "0"):
    _impl = _py
    BACKEND = "python"
else:
    try:
        from . import _ext as _impl  # type: ignore[no-redef]

        BACKEND = "ext"
    except ImportError:
        _impl = _py
        BACKEND = "python"

project_points = _impl.project_points
zbuffer_select = _impl.zbuffer_select
clamped_walk = _impl.clamped_walk

__all__ = ["project_points", "zbuffer_select", "clamped_walk", "BACKEND"]
