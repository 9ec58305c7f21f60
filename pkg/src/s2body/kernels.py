"""Backend dispatch for the integration kernels.

The compiled extension is used when present; set S2BODY_PURE_PYTHON=1 to
force the numpy implementations. Both backends share signatures and RK4
algebra; agreement is to rounding, not bit-exact.
"""
import os

from ._kernels_py import COT_GUARD, NEWT_GUARD
from . import _kernels_py

if os.environ.get("S2BODY_PURE_PYTHON") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_c as _impl
        BACKEND = "c"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

euler_rk4 = _impl.euler_rk4
nbody_rk4 = _impl.nbody_rk4

__all__ = ["euler_rk4", "nbody_rk4", "BACKEND", "COT_GUARD", "NEWT_GUARD"]
