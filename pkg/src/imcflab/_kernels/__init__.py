"""Kernel backend selection.

The compiled extension is preferred when importable; set IMCF_KERNELS=python
to force the numpy fallback, or IMCF_KERNELS=compiled to fail loudly when
the extension is missing. Both backends implement the same two functions
with identical signatures and agree to round-off.
"""

import os

from . import fallback

_requested = os.environ.get("IMCF_KERNELS", "auto").lower()
_impl = None

if _requested in ("auto", "compiled"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "IMCF_KERNELS=compiled but the compiled kernel extension "
                "is not importable; reinstall the package or unset the variable"
            ) from None
elif _requested not in ("python", "fallback"):
    raise ValueError(f"IMCF_KERNELS={_requested!r} not one of auto/compiled/python")

if _impl is None:
    _impl = fallback
    BACKEND = "python"
else:
    BACKEND = "compiled"

axisym_rhs = _impl.axisym_rhs
s2_rhs = _impl.s2_rhs

__all__ = ["axisym_rhs", "s2_rhs", "BACKEND", "fallback"]
