from __future__ import annotations

import numpy as np
import pytest

from cricseg import kernels

needs_native = pytest.mark.skipif(
    not kernels.NATIVE_AVAILABLE, reason="compiled kernels not built"
)


def reference_bg_update(mean, luma, lr, thresh):
    """Straight-line numpy oracle, independent of both implementations."""
    diff = luma.astype(np.float64) - mean.astype(np.float64)
    mask = np.abs(diff) > thresh
    new_mean = mean.astype(np.float64) + lr * diff
    return new_mean, mask


class TestFallback:
    def test_matches_reference(self):
        rng = np.random.default_rng(0)
        impl = kernels.get_impl("fallback")
        mean = rng.uniform(0, 255, size=(37, 53)).astype(np.float32)
        mask = np.zeros(mean.shape, dtype=np.bool_)
        luma = rng.integers(0, 256, size=mean.shape, dtype=np.uint8)
        want_mean, want_mask = reference_bg_update(mean.copy(), luma, 0.05, 25.0)
        impl.bg_update(mean, luma, 0.05, 25.0, mask, True)
        np.testing.assert_array_equal(mask, want_mask)
        np.testing.assert_allclose(mean, want_mean, atol=1e-3)

    def test_band_diff_matches_reference(self):
        rng = np.random.default_rng(1)
        impl = kernels.get_impl("fallback")
        a = rng.integers(0, 256, size=(15, 31), dtype=np.uint8)
        b = rng.integers(0, 256, size=(15, 31), dtype=np.uint8)
        want = np.abs(a.astype(int) - b.astype(int)).mean()
        assert impl.band_abs_diff_mean(a, b) == pytest.approx(want)

    def test_compute_mask_false_skips_mask(self):
        impl = kernels.get_impl("fallback")
        mean = np.zeros((4, 4), dtype=np.float32)
        mask = np.zeros((4, 4), dtype=np.bool_)
        luma = np.full((4, 4), 200, dtype=np.uint8)
        impl.bg_update(mean, luma, 0.1, 25.0, mask, False)
        assert not mask.any()
        assert mean[0, 0] == pytest.approx(20.0)


@needs_native
class TestNativeEquivalence:
    def test_repeated_updates_agree(self):
        rng = np.random.default_rng(2)
        native = kernels.get_impl("native")
        fallback = kernels.get_impl("fallback")
        shape = (45, 61)
        mean_n = rng.uniform(0, 255, size=shape).astype(np.float32)
        mean_f = mean_n.copy()
        mask_n = np.zeros(shape, dtype=np.bool_)
        mask_f = np.zeros(shape, dtype=np.bool_)
        for _ in range(20):
            luma = rng.integers(0, 256, size=shape, dtype=np.uint8)
            native.bg_update(mean_n, luma, 0.05, 25.0, mask_n, True)
            fallback.bg_update(mean_f, luma, 0.05, 25.0, mask_f, True)
            np.testing.assert_array_equal(mask_n, mask_f)
            np.testing.assert_allclose(mean_n, mean_f, atol=1e-3)

    def test_band_diff_agrees(self):
        rng = np.random.default_rng(3)
        native = kernels.get_impl("native")
        fallback = kernels.get_impl("fallback")
        a = rng.integers(0, 256, size=(9, 200), dtype=np.uint8)
        b = rng.integers(0, 256, size=(9, 200), dtype=np.uint8)
        assert native.band_abs_diff_mean(a, b) == pytest.approx(
            fallback.band_abs_diff_mean(a, b)
        )

    def test_shape_mismatch_raises(self):
        native = kernels.get_impl("native")
        mean = np.zeros((4, 4), dtype=np.float32)
        mask = np.zeros((4, 4), dtype=np.bool_)
        with pytest.raises(ValueError):
            native.bg_update(mean, np.zeros((4, 5), dtype=np.uint8), 0.1, 25.0, mask, True)


class TestSelection:
    def test_unknown_impl_rejected(self):
        with pytest.raises(ValueError):
            kernels.get_impl("gpu")

    def test_available_impls_contains_fallback(self):
        assert "fallback" in kernels.available_impls()

    def test_active_impl_is_available(self):
        assert kernels.ACTIVE_IMPL in kernels.available_impls()
