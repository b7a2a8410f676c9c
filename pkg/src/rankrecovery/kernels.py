"""Backend selection for the redistribution kernel.

The compiled extension is used when it was built; otherwise, or when
``RANKRECOVERY_PURE_PYTHON`` is set to a non-empty value, the pure-Python
kernel is used. Both produce identical results.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("RANKRECOVERY_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"


def redistribute_loads(ids, loads, epsilon, max_passes):
    try:
        return _impl.redistribute_loads(ids, loads, epsilon, max_passes)
    except OverflowError:
        # values beyond int64 range
        return _kernels_py.redistribute_loads(ids, loads, epsilon, max_passes)
