# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-pixel kernels: single fused pass per frame."""

import numpy as np

cimport cython


def bg_update(
    float[:, ::1] mean,
    const unsigned char[:, :] luma,
    float learning_rate,
    float diff_threshold,
    unsigned char[:, ::1] mask,
    bint compute_mask=True,
):
    cdef Py_ssize_t h = mean.shape[0]
    cdef Py_ssize_t w = mean.shape[1]
    if luma.shape[0] != h or luma.shape[1] != w:
        raise ValueError("frame shape does not match model")
    if compute_mask and (mask.shape[0] != h or mask.shape[1] != w):
        raise ValueError("mask shape does not match model")
    cdef Py_ssize_t i, j
    cdef float d, ad
    with nogil:
        for i in range(h):
            for j in range(w):
                d = <float> luma[i, j] - mean[i, j]
                if compute_mask:
                    ad = -d if d < 0 else d
                    mask[i, j] = 1 if ad > diff_threshold else 0
                mean[i, j] = mean[i, j] + learning_rate * d


def band_abs_diff_mean(
    const unsigned char[:, :] first,
    const unsigned char[:, :] last,
):
    cdef Py_ssize_t h = first.shape[0]
    cdef Py_ssize_t w = first.shape[1]
    if last.shape[0] != h or last.shape[1] != w:
        raise ValueError("band shapes differ")
    cdef Py_ssize_t i, j
    cdef long long total = 0
    cdef int d
    with nogil:
        for i in range(h):
            for j in range(w):
                d = <int> first[i, j] - <int> last[i, j]
                total += -d if d < 0 else d
    return total / <double> (h * w)
