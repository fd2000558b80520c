"""Kernel backend selection.

Prefers the compiled extension, falls back to NumPy.  Set
HONEST_ESP_BACKEND=numpy or =compiled to force a choice; forcing the
compiled backend when it is not built raises ImportError.
"""

import os

_forced = os.environ.get("HONEST_ESP_BACKEND", "").strip().lower()

if _forced == "numpy":
    from . import _fallback as _impl

    BACKEND = "numpy"
elif _forced == "compiled":
    from . import _core as _impl

    BACKEND = "compiled"
else:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import _fallback as _impl

        BACKEND = "numpy"

natural_m = _impl.natural_m
eval_cubic = _impl.eval_cubic

__all__ = ["BACKEND", "natural_m", "eval_cubic"]
