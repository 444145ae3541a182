# cython: boundscheck=False, wraparound=False, cdivision=True
"""Direct NCHW float64 convolution kernels for the hot forward/backward loops."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def conv2d_forward(double[:, :, :, ::1] x, double[:, :, :, ::1] w, int stride, int pad):
    cdef Py_ssize_t B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3]
    cdef Py_ssize_t O = w.shape[0], KH = w.shape[2], KW = w.shape[3]
    cdef Py_ssize_t OH = (H + 2 * pad - KH) // stride + 1
    cdef Py_ssize_t OW = (W + 2 * pad - KW) // stride + 1
    out_arr = np.zeros((B, O, OH, OW), dtype=np.float64)
    cdef double[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t b, o, c, i, j, ki, kj, ii, jj
    cdef double acc
    with nogil:
        for b in range(B):
            for o in range(O):
                for i in range(OH):
                    for j in range(OW):
                        acc = 0.0
                        for c in range(C):
                            for ki in range(KH):
                                ii = i * stride - pad + ki
                                if ii < 0 or ii >= H:
                                    continue
                                for kj in range(KW):
                                    jj = j * stride - pad + kj
                                    if jj < 0 or jj >= W:
                                        continue
                                    acc += x[b, c, ii, jj] * w[o, c, ki, kj]
                        out[b, o, i, j] = acc
    return out_arr


def conv2d_backward(
    double[:, :, :, ::1] x,
    double[:, :, :, ::1] w,
    double[:, :, :, ::1] g,
    int stride,
    int pad,
):
    cdef Py_ssize_t B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3]
    cdef Py_ssize_t O = w.shape[0], KH = w.shape[2], KW = w.shape[3]
    cdef Py_ssize_t OH = g.shape[2], OW = g.shape[3]
    dx_arr = np.zeros((B, C, H, W), dtype=np.float64)
    dw_arr = np.zeros((O, C, KH, KW), dtype=np.float64)
    cdef double[:, :, :, ::1] dx = dx_arr
    cdef double[:, :, :, ::1] dw = dw_arr
    cdef Py_ssize_t b, o, c, i, j, ki, kj, ii, jj
    cdef double gval
    with nogil:
        for b in range(B):
            for o in range(O):
                for i in range(OH):
                    for j in range(OW):
                        gval = g[b, o, i, j]
                        if gval == 0.0:
                            continue
                        for c in range(C):
                            for ki in range(KH):
                                ii = i * stride - pad + ki
                                if ii < 0 or ii >= H:
                                    continue
                                for kj in range(KW):
                                    jj = j * stride - pad + kj
                                    if jj < 0 or jj >= W:
                                        continue
                                    dx[b, c, ii, jj] += gval * w[o, c, ki, kj]
                                    dw[o, c, ki, kj] += gval * x[b, c, ii, jj]
    return dx_arr, dw_arr
