"""Select the compiled kernels when available, else the numpy fallback.

Set ``SHIFTCRAFT_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

try:
    if os.environ.get("SHIFTCRAFT_PURE_PYTHON") == "1":
        raise ImportError("pure-Python backend requested")
    from . import _ckernels as kernels

    BACKEND = "cython"
except ImportError:
    kernels = _pykernels
    BACKEND = "python"

python_kernels = _pykernels
