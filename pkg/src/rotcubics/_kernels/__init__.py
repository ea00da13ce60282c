"""Fixed-step RK4 runners for the small built-in flows.

A compiled Cython core is used when available; otherwise the numpy fallback
with identical semantics is selected at import.  `BACKEND` names the choice.
Set ROTCUBICS_PURE=1 to force the fallback (testing, benchmarking).
"""

import os

if os.environ.get("ROTCUBICS_PURE"):
    from . import _fallback as backend

    BACKEND = "python"
else:
    try:
        from . import _native as backend

        BACKEND = "native"
    except ImportError:  # pragma: no cover - depends on build environment
        from . import _fallback as backend

        BACKEND = "python"

run_nhp = backend.run_nhp
run_ep2 = backend.run_ep2
run_sphere_cubic = backend.run_sphere_cubic
run_lp1 = backend.run_lp1
run_lift = backend.run_lift
