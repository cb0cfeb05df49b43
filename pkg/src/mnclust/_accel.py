"""Select the compiled kernels when the extension is built, else the numpy fallback.

Set ``MNCLUST_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
kernels = _pykernels

if not os.environ.get("MNCLUST_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        kernels = _ckernels
        BACKEND = "cython"

__all__ = ["BACKEND", "kernels", "_pykernels"]
