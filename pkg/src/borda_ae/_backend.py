"""Select the compiled kernels when available, else the numpy fallback.

Set ``BORDA_AE_BACKEND=python`` to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
kernels = _fallback

if os.environ.get("BORDA_AE_BACKEND", "").lower() != "python":
    try:
        from . import _native
    except ImportError:
        pass
    else:
        kernels = _native
        BACKEND = "native"

SE, MATERN52, LINEAR = _fallback.SE, _fallback.MATERN52, _fallback.LINEAR
