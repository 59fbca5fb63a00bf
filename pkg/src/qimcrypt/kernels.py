"""Kernel selection: compiled extension when importable, numpy otherwise.

Set ``QIMCRYPT_PURE_PYTHON=1`` to force the numpy path.
"""
import os

from . import _kernels_py

if os.environ.get("QIMCRYPT_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
apply_mcx = _impl.apply_mcx
apply_1q = _impl.apply_1q

__all__ = ["BACKEND", "apply_mcx", "apply_1q", "_kernels_py"]
