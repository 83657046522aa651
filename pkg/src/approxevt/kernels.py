"""Kernel backend selection.

The compiled extension is used when it imports; ``APPROXEVT_PURE=1`` forces
the numpy fallback.  ``BACKEND`` names the active one.
"""
import os

from . import _kernels_py

if os.environ.get("APPROXEVT_PURE") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

lattice_count = _impl.lattice_count
lattice_fill = _impl.lattice_fill
mcshane_batch = _impl.mcshane_batch
lattice_min_quad = _impl.lattice_min_quad

__all__ = ["BACKEND", "lattice_count", "lattice_fill", "mcshane_batch", "lattice_min_quad"]
