"""Backend selection for the finite-section kernels.

The compiled ``_kernels_c`` extension is used when it was built; otherwise
the NumPy fallback in ``_kernels_py`` is used.  Setting the environment
variable ``FREEFOCK_PURE_PYTHON=1`` forces the fallback.
"""
import os

from freefock import _kernels_py

if os.environ.get("FREEFOCK_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from freefock import _kernels_c as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
        BACKEND = "python"

section_rows = _impl.section_rows
matvec = _impl.matvec
rmatvec = _impl.rmatvec
normal_matvec = _impl.normal_matvec
power_iteration = _impl.power_iteration

__all__ = ["BACKEND", "section_rows", "matvec", "rmatvec", "normal_matvec", "power_iteration"]
