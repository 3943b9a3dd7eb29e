"""Picks the kernel implementation at import time.

``CMH_BACKEND=python`` forces the numpy fallback; ``CMH_BACKEND=cython``
makes a missing extension an import error instead of a silent fallback.
"""

import os

_choice = os.environ.get("CMH_BACKEND", "").strip().lower()

if _choice == "python":
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        if _choice == "cython":
            raise
        from . import _kernels_py as kernels

BACKEND = kernels.BACKEND
