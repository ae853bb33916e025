"""Select the compiled kernels when available, else the numpy fallback.

Set ``APTATTRIB_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("APTATTRIB_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND
best_split = _impl.best_split
svm_dual_cd = _impl.svm_dual_cd


def available_backends() -> dict:
    out = {"python": _kernels_py}
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        out["cython"] = _kernels
    return out
