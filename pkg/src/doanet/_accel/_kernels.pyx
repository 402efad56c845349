# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: fractional-delay RIR accumulation and the 2x1
convolution used by the phase-map CNN.  Contracts match _kernels_py."""

from libc.math cimport cos, sin, ceil, M_PI
from libc.stdlib cimport malloc, free

import numpy as np

ctypedef fused floating:
    float
    double

BACKEND = "compiled"


def rir_accumulate(times, amps, Py_ssize_t num_taps, Py_ssize_t half_width=40):
    """Accumulate Hann-windowed-sinc pulses; see _kernels_py.rir_accumulate."""
    cdef double[::1] t = np.ascontiguousarray(times, dtype=np.float64).reshape(-1)
    cdef double[::1] a = np.ascontiguousarray(amps, dtype=np.float64).reshape(-1)
    if t.shape[0] != a.shape[0]:
        raise ValueError("times and amps must have equal length")
    out = np.zeros(num_taps)
    cdef double[::1] h = out
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t i, j, j0, j1
    cdef double ti, ai, x, win, s
    with nogil:
        for i in range(n):
            ti = t[i]
            ai = a[i]
            j0 = <Py_ssize_t>ceil(ti - half_width)
            j1 = <Py_ssize_t>(ti + half_width)
            if j0 < 0:
                j0 = 0
            if j1 > num_taps - 1:
                j1 = num_taps - 1
            for j in range(j0, j1 + 1):
                x = j - ti
                win = 0.5 * (1.0 + cos(M_PI * x / half_width))
                if x == 0.0:
                    s = 1.0
                else:
                    s = sin(M_PI * x) / (M_PI * x)
                h[j] += ai * win * s
    return out


def conv2x1_forward(x, w, b):
    """Valid 2x1 convolution along the mic axis; see _kernels_py."""
    if x.shape[1] < 2:
        raise ValueError("conv2x1 needs at least 2 rows in the mic axis")
    if x.dtype == np.float32:
        return _conv_fwd[float](x, w, b,
                                np.empty((x.shape[0], x.shape[1] - 1,
                                          x.shape[2], w.shape[2]),
                                         dtype=np.float32))
    return _conv_fwd[double](x, w, b,
                             np.empty((x.shape[0], x.shape[1] - 1,
                                       x.shape[2], w.shape[2])))


def conv2x1_backward(x, w, dy):
    """Gradients of conv2x1_forward; see _kernels_py."""
    dx = np.zeros_like(x)
    dw = np.zeros_like(w)
    db = np.zeros(w.shape[2], dtype=w.dtype)
    if x.dtype == np.float32:
        _conv_bwd[float](x, w, dy, dx, dw, db)
    else:
        _conv_bwd[double](x, w, dy, dx, dw, db)
    return dx, dw, db


cdef _conv_fwd(floating[:, :, :, ::1] x, floating[:, :, ::1] w,
               floating[::1] b, out):
    cdef floating[:, :, :, ::1] y = out
    cdef Py_ssize_t B = x.shape[0], H = x.shape[1], K = x.shape[2]
    cdef Py_ssize_t C = x.shape[3], F = w.shape[2]
    cdef Py_ssize_t bi, i, k, c, f
    cdef floating x0, x1
    cdef floating *acc = <floating *>malloc(F * sizeof(floating))
    if acc == NULL:
        raise MemoryError()
    try:
        with nogil:
            for bi in range(B):
                for i in range(H - 1):
                    for k in range(K):
                        for f in range(F):
                            acc[f] = b[f]
                        for c in range(C):
                            x0 = x[bi, i, k, c]
                            x1 = x[bi, i + 1, k, c]
                            for f in range(F):
                                acc[f] += x0 * w[0, c, f] + x1 * w[1, c, f]
                        for f in range(F):
                            y[bi, i, k, f] = acc[f]
    finally:
        free(acc)
    return out


cdef _conv_bwd(floating[:, :, :, ::1] x, floating[:, :, ::1] w,
               floating[:, :, :, ::1] dy, floating[:, :, :, ::1] dx,
               floating[:, :, ::1] dw, floating[::1] db):
    cdef Py_ssize_t B = x.shape[0], H = x.shape[1], K = x.shape[2]
    cdef Py_ssize_t C = x.shape[3], F = w.shape[2]
    cdef Py_ssize_t bi, i, k, c, f
    cdef floating g, acc0, acc1, x0, x1
    with nogil:
        for bi in range(B):
            for i in range(H - 1):
                for k in range(K):
                    for f in range(F):
                        g = dy[bi, i, k, f]
                        db[f] += g
                    for c in range(C):
                        x0 = x[bi, i, k, c]
                        x1 = x[bi, i + 1, k, c]
                        acc0 = 0
                        acc1 = 0
                        for f in range(F):
                            g = dy[bi, i, k, f]
                            acc0 += w[0, c, f] * g
                            acc1 += w[1, c, f] * g
                            dw[0, c, f] += x0 * g
                            dw[1, c, f] += x1 * g
                        dx[bi, i, k, c] += acc0
                        dx[bi, i + 1, k, c] += acc1
