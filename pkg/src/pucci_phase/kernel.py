"""Selects the integration kernel at import time.

The compiled ``_kernel`` is preferred.  Set ``PUCCI_PHASE_PURE=1`` to force
the pure-Python fallback.
"""
import os

from . import _kernel_py
from ._kernel_py import (  # noqa: F401  (re-exported constants)
    EV_BLOWUP_X, EV_BLOWUP_Z, EV_CAPTURE, EV_CONCAVITY, EV_SECTION, EV_WALL, EV_XNULL,
    EV_ZNULL, ST_BLOWUP_X, ST_BLOWUP_Z, ST_CAPTURED, ST_HORIZON, ST_MAX_STEPS,
    ST_NONFINITE, ST_SECTION_LIMIT, ST_UNDERFLOW,
)

BACKEND = "python"
integrate_kernel = _kernel_py.integrate_kernel

if os.environ.get("PUCCI_PHASE_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernel as _compiled
    except ImportError:
        pass
    else:
        integrate_kernel = _compiled.integrate_kernel
        BACKEND = "compiled"
