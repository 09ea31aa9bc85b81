"""Select the direct-convolution backend: compiled core if built, numpy
fallback otherwise.  ``SQFN_FORCE_FALLBACK=1`` forces the fallback (used
by the benchmark and by tests that compare the two lanes)."""
import os

if os.environ.get("SQFN_FORCE_FALLBACK") == "1":
    from . import _convfallback as _impl
else:
    try:
        from . import _convcore as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _convfallback as _impl

BACKEND = _impl.BACKEND
conv_full_1d = _impl.conv_full_1d
conv_full_2d = _impl.conv_full_2d
