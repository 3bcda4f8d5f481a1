"""Select the compiled kernels when available, else the numpy fallback.

Set ``ISOTROPY_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

python_kernels = _pykernels

try:
    if os.environ.get("ISOTROPY_PURE_PYTHON") == "1":
        raise ImportError("pure Python kernels requested")
    from . import _kernels as compiled_kernels
except ImportError:
    compiled_kernels = None

if compiled_kernels is not None:
    BACKEND = "cython"
    kernel_sums = compiled_kernels.kernel_sums
    directional_sums = compiled_kernels.directional_sums
else:
    BACKEND = "python"
    kernel_sums = _pykernels.kernel_sums
    directional_sums = _pykernels.directional_sums
