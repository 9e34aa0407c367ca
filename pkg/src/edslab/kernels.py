"""Backend selection for the hot kernels.

The compiled extension is used when it was built; otherwise the numpy
fallback.  Set ``EDSLAB_PURE_PYTHON=1`` to force the fallback.
"""
import os

from edslab import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("EDSLAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from edslab import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

eval_batch = _impl.eval_batch
point_frames = _impl.point_frames

__all__ = ["BACKEND", "eval_batch", "point_frames"]
