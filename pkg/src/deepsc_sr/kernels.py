"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the pure-Python
module takes over. Set ``DEEPSC_SR_PURE=1`` to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("DEEPSC_SR_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _pykernels

ctc_forward_backward = _impl.ctc_forward_backward
edit_counts = _impl.edit_counts
polar_scl_decode = _impl.polar_scl_decode

__all__ = ["BACKEND", "ctc_forward_backward", "edit_counts", "polar_scl_decode"]
