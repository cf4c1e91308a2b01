"""Kernel selection: compiled extension when built, numpy fallback otherwise."""

from . import _cdtw_py

try:
    from . import _cdtw as _compiled
except ImportError:  # extension not built; fall back to numpy
    _compiled = None

HAVE_COMPILED = _compiled is not None

if HAVE_COMPILED:
    band_dtw = _compiled.band_dtw
    band_dtw_block = _compiled.band_dtw_block
else:
    band_dtw = _cdtw_py.band_dtw
    band_dtw_block = _cdtw_py.band_dtw_block

fallback_band_dtw = _cdtw_py.band_dtw
fallback_band_dtw_block = _cdtw_py.band_dtw_block

__all__ = [
    "HAVE_COMPILED",
    "band_dtw",
    "band_dtw_block",
    "fallback_band_dtw",
    "fallback_band_dtw_block",
]
