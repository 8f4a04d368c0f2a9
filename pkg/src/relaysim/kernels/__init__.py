"""Hot-kernel backend selection.

The compiled Cython core is used when available; setting the environment
variable ``RELAYSIM_PURE=1`` (or a failed build) selects the NumPy fallback.
``BACKEND`` names the active implementation.
"""
from __future__ import annotations

import os

from . import _pure

if os.environ.get("RELAYSIM_PURE"):
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _speed as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

cis = _impl.cis
upa_phases = _impl.upa_phases
cascade_response = _impl.cascade_response
direct_response = _impl.direct_response

__all__ = ["BACKEND", "cis", "upa_phases", "cascade_response", "direct_response"]
