"""Kernel backend selection.

The compiled extension is preferred; the numpy fallback is used when it
is missing or when the PHOTONPAIR_PURE environment variable is set to a
non-empty value.  ``BACKEND`` records which one is active.
"""

import os

if os.environ.get("PHOTONPAIR_PURE"):
    from . import fallback as impl
    BACKEND = "python"
else:
    try:
        from . import _core as impl
        BACKEND = "compiled"
    except ImportError:
        from . import fallback as impl
        BACKEND = "python"

comb_amplitude = impl.comb_amplitude
correlate_ticks = impl.correlate_ticks

__all__ = ["BACKEND", "comb_amplitude", "correlate_ticks", "impl"]
