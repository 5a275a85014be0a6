"""Pure numpy implementations of the per-pixel kernels.

Drop-in twin of the compiled module; selected automatically when the
extension is not built.
"""

from __future__ import annotations

import numpy as np


def bg_update(
    mean: np.ndarray,
    luma: np.ndarray,
    learning_rate: float,
    diff_threshold: float,
    mask: np.ndarray,
    compute_mask: bool = True,
) -> None:
    """Blend one frame into the running background and flag deviating pixels.

    ``mean`` (float32) is updated in place toward ``luma``; when
    ``compute_mask`` is set, ``mask`` (bool) is filled with pixels whose
    absolute deviation from the pre-update mean exceeds ``diff_threshold``.
    """
    diff = luma.astype(np.float32)
    diff -= mean
    if compute_mask:
        np.greater(np.abs(diff), diff_threshold, out=mask)
    mean += learning_rate * diff


def band_abs_diff_mean(first: np.ndarray, last: np.ndarray) -> float:
    """Mean absolute difference between two uint8 rasters of equal shape."""
    a = first.astype(np.int16)
    a -= last
    return float(np.mean(np.abs(a, out=a)))
