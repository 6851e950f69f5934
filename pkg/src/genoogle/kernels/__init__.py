"""Kernel backend selection.

The compiled extension is preferred; the pure-Python module is used when
the extension is missing or when GENOOGLE_PURE_PYTHON is set in the
environment.  Both expose the same functions with identical behavior.
"""

import os

from . import _pure

if os.environ.get("GENOOGLE_PURE_PYTHON"):
    _impl = _pure
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _pure

BACKEND = _impl.BACKEND

unpack_2bit = _impl.unpack_2bit
window_values = _impl.window_values
seed_hits = _impl.seed_hits
chain_areas = _impl.chain_areas
xdrop_extend = _impl.xdrop_extend
sw_local = _impl.sw_local
sw_global = _impl.sw_global
sw_global_segmented = _impl.sw_global_segmented

__all__ = [
    "BACKEND",
    "unpack_2bit",
    "window_values",
    "seed_hits",
    "chain_areas",
    "xdrop_extend",
    "sw_local",
    "sw_global",
    "sw_global_segmented",
]
