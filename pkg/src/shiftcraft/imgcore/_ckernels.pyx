# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-pixel kernels. Semantics match _pykernels exactly."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef int DR[4][2]
cdef int DC[4][2]
DR[0][:] = [0, 0]
DC[0][:] = [1, -1]
DR[1][:] = [1, -1]
DC[1][:] = [1, -1]
DR[2][:] = [1, -1]
DC[2][:] = [0, 0]
DR[3][:] = [1, -1]
DC[3][:] = [-1, 1]


def nms(const double[:, ::1] mag, const unsigned char[:, ::1] bins):
    cdef Py_ssize_t h = mag.shape[0], w = mag.shape[1]
    out_arr = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, c, rr, cc
    cdef int b, k
    cdef double m
    cdef bint keep
    for r in range(h):
        for c in range(w):
            m = mag[r, c]
            if m == 0.0:
                continue
            b = bins[r, c]
            keep = True
            for k in range(2):
                rr = r + DR[b][k]
                cc = c + DC[b][k]
                if 0 <= rr < h and 0 <= cc < w and mag[rr, cc] > m:
                    keep = False
                    break
            if keep:
                out[r, c] = m
    return out_arr


def hysteresis(const double[:, ::1] mag, double low, double high):
    cdef Py_ssize_t h = mag.shape[0], w = mag.shape[1], n = h * w
    out_arr = np.zeros((h, w), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    stack_arr = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] stack = stack_arr
    cdef Py_ssize_t top = 0, r, c, rr, cc, p
    for r in range(h):
        for c in range(w):
            if mag[r, c] >= high and out[r, c] == 0:
                out[r, c] = 1
                stack[0] = r * w + c
                top = 1
                while top > 0:
                    top -= 1
                    p = stack[top]
                    for rr in range(p // w - 1, p // w + 2):
                        if rr < 0 or rr >= h:
                            continue
                        for cc in range(p % w - 1, p % w + 2):
                            if cc < 0 or cc >= w:
                                continue
                            if out[rr, cc] == 0 and mag[rr, cc] >= low:
                                out[rr, cc] = 1
                                stack[top] = rr * w + cc
                                top += 1
    return out_arr.astype(bool)


def label8(const unsigned char[:, ::1] bits):
    cdef Py_ssize_t h = bits.shape[0], w = bits.shape[1], n = h * w
    labels_arr = np.zeros((h, w), dtype=np.int32)
    cdef int[:, ::1] labels = labels_arr
    stack_arr = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] stack = stack_arr
    cdef Py_ssize_t top, r, c, rr, cc, p
    cdef int cur = 0
    for r in range(h):
        for c in range(w):
            if bits[r, c] and labels[r, c] == 0:
                cur += 1
                labels[r, c] = cur
                stack[0] = r * w + c
                top = 1
                while top > 0:
                    top -= 1
                    p = stack[top]
                    for rr in range(p // w - 1, p // w + 2):
                        if rr < 0 or rr >= h:
                            continue
                        for cc in range(p % w - 1, p % w + 2):
                            if cc < 0 or cc >= w:
                                continue
                            if bits[rr, cc] and labels[rr, cc] == 0:
                                labels[rr, cc] = cur
                                stack[top] = rr * w + cc
                                top += 1
    return labels_arr, cur
