"""Backend selection for the hot kernels.

The compiled extension ``kprabhakar._native`` is preferred. Setting the
environment variable ``KPRABHAKAR_BACKEND=python`` forces the interpreted
fallback, which is also used automatically when the extension is missing.
"""

from __future__ import annotations

import os

from . import _fallback

_requested = os.environ.get("KPRABHAKAR_BACKEND", "auto").strip().lower()

if _requested == "python":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        if _requested == "native":
            raise
        _impl = _fallback
        BACKEND = "python"

ml_series = _impl.ml_series
kernel_weights = _impl.kernel_weights
causal_apply = _impl.causal_apply

__all__ = ["BACKEND", "ml_series", "kernel_weights", "causal_apply"]
