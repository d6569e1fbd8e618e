"""Backend selection for the hot kernels.

The compiled Cython module is used when it was built; otherwise the
numpy/pure-Python twins in ``_kernels_py`` are used.  Setting the
environment variable ``SINGCERT_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _kernels_py as python_backend

try:
    from . import _kernels as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and not os.environ.get("SINGCERT_PURE_PYTHON"):
    _impl = compiled_backend
    BACKEND = "cython"
else:
    _impl = python_backend
    BACKEND = "python"

eval_points = _impl.eval_points
taylor_shift = _impl.taylor_shift

__all__ = ["BACKEND", "eval_points", "taylor_shift", "compiled_backend", "python_backend"]
