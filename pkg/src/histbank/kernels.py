"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the pure-Python
module with identical signatures.  Setting ``HISTBANK_PURE=1`` forces the
fallback (used by the benchmark and the backend-parity tests).
"""
import os

if os.environ.get("HISTBANK_PURE"):
    from . import _pykernels as _impl
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        from . import _pykernels as _impl
        BACKEND = "python"

osa_distance = _impl.osa_distance
osa_bounded = _impl.osa_bounded
osa_batch = _impl.osa_batch
zs_treedist = _impl.zs_treedist


def available_backends():
    """Map of backend name to kernel module for every importable backend."""
    from . import _pykernels
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out
