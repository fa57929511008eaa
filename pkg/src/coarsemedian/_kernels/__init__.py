"""Hot-loop kernels with a compiled backend and a numpy fallback.

The compiled extension is used when it imports and ``COARSEMEDIAN_PURE`` is
unset (or ``0``). ``BACKEND`` names the active choice.
"""

import os

from . import _pykernels as pure

compiled = None
if os.environ.get("COARSEMEDIAN_PURE", "0") in ("", "0"):
    try:
        from . import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None

_impl = compiled if compiled is not None else pure
BACKEND = "cython" if compiled is not None else "numpy"

distributivity_violations = _impl.distributivity_violations
interval_bitsets = _impl.interval_bitsets
median_scan = _impl.median_scan
four_point_delta = _impl.four_point_delta
minmax_centers = _impl.minmax_centers

__all__ = [
    "BACKEND",
    "compiled",
    "pure",
    "distributivity_violations",
    "interval_bitsets",
    "median_scan",
    "four_point_delta",
    "minmax_centers",
]
