"""Kernel backend selection.

The numba kernels are used when numba imports cleanly, unless the environment
variable ``OTIMA_DISABLE_NUMBA`` is set to a true value (1, true, yes, on), in
which case the pure-numpy kernels are used. The choice is made once, at import.
"""
import os

from . import _kernels_numpy

_FLAG = os.environ.get("OTIMA_DISABLE_NUMBA", "").strip().lower()
DISABLED = _FLAG in {"1", "true", "yes", "on"}

try:
    if DISABLED:
        raise ImportError
    from . import _kernels_numba
except ImportError:
    _kernels_numba = None

kernels = _kernels_numba if _kernels_numba is not None else _kernels_numpy
BACKEND = "numba" if _kernels_numba is not None else "numpy"
