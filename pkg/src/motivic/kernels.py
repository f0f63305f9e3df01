"""Kernel dispatch: the compiled extension when it was built, else Python.

Set MOTIVIC_PURE_PYTHON=1 to force the fallback.
"""

import os

from . import _pykernels

try:
    if os.environ.get("MOTIVIC_PURE_PYTHON"):
        raise ImportError("pure python requested")
    from . import _kernels as _impl
    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

count_levels = _impl.count_levels
valuation_histogram = _impl.valuation_histogram
