"""Kernel backend dispatch.

The compiled extension (`isplib.kernels._core`) is preferred when it was
built; otherwise the NumPy fallback is used. Set ISPLIB_PURE_PYTHON=1 to
force the fallback (used by the benchmark and the parity tests).
"""

from __future__ import annotations

import os

from . import _numpy

if os.environ.get("ISPLIB_PURE_PYTHON"):
    _impl = _numpy
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _numpy

BACKEND = _impl.BACKEND_NAME

sor_solve = _impl.sor_solve
slice_grid_3d = _impl.slice_grid_3d
sample_lut_2d = _impl.sample_lut_2d
sample_lut_3d = _impl.sample_lut_3d
bgu_accumulate = _impl.bgu_accumulate
bgu_apply = _impl.bgu_apply

__all__ = [
    "BACKEND",
    "sor_solve",
    "slice_grid_3d",
    "sample_lut_2d",
    "sample_lut_3d",
    "bgu_accumulate",
    "bgu_apply",
]
