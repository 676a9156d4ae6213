"""Kernel backend selection: compiled extension if available, NumPy otherwise.

Set ECHOROOM_FORCE_PYTHON=1 to force the fallback (used by tests and the
benchmark to compare both implementations).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("ECHOROOM_FORCE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

pick_peaks = _impl.pick_peaks
common_is_search = _impl.common_is_search
