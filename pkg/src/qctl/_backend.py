"""Pick the compiled RK4 kernels when available, else the numpy fallback.

Set ``QCTL_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("QCTL_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as kernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as kernels
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
