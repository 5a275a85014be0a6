"""Hot per-pixel kernels with a compiled core and a numpy fallback.

The compiled extension (``cricseg.kernels._native``) is used when it was
built; otherwise the numpy twin takes over transparently. Both expose the
same two functions and are kept behaviourally identical, which the test
suite and the ``bench --impl both`` comparison enforce.
"""

from __future__ import annotations

import numpy as np

from cricseg.kernels import _fallback

try:
    from cricseg.kernels import _native

    NATIVE_AVAILABLE = True
except ImportError:
    _native = None
    NATIVE_AVAILABLE = False

ACTIVE_IMPL = "native" if NATIVE_AVAILABLE else "fallback"


def available_impls() -> tuple[str, ...]:
    return ("native", "fallback") if NATIVE_AVAILABLE else ("fallback",)


class _Impl:
    """Uniform wrapper so callers never deal with buffer dtype details."""

    def __init__(self, name: str, module) -> None:
        self.name = name
        self._mod = module

    def bg_update(self, mean, luma, learning_rate, diff_threshold, mask, compute_mask=True):
        if self.name == "native":
            view = mask.view(np.uint8) if mask.dtype == np.bool_ else mask
            self._mod.bg_update(mean, luma, learning_rate, diff_threshold, view, compute_mask)
        else:
            self._mod.bg_update(mean, luma, learning_rate, diff_threshold, mask, compute_mask)

    def band_abs_diff_mean(self, first, last) -> float:
        return float(self._mod.band_abs_diff_mean(first, last))


def get_impl(name: str | None = None) -> _Impl:
    """Return a kernel implementation by name; default is the active one."""
    if name is None:
        name = ACTIVE_IMPL
    if name == "native":
        if not NATIVE_AVAILABLE:
            raise ValueError("native kernels are not built; reinstall with Cython available")
        return _Impl("native", _native)
    if name == "fallback":
        return _Impl("fallback", _fallback)
    raise ValueError(f"unknown kernel implementation: {name!r}")


_default = get_impl()
bg_update = _default.bg_update
band_abs_diff_mean = _default.band_abs_diff_mean
