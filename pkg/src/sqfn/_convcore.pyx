# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled direct-convolution kernels (full correlation-free sums).

These implement the plain summation definition, independent of any FFT,
so they double as the oracle side of the direct-vs-fourier agreement
checks.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


def conv_full_1d(double[::1] f, double[::1] k):
    """Full discrete convolution: out[s] = sum_j k[j] * f[s - j]."""
    cdef Py_ssize_t nf = f.shape[0]
    cdef Py_ssize_t nk = k.shape[0]
    cdef Py_ssize_t no = nf + nk - 1
    out_arr = np.zeros(no, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double fi
    for i in range(nf):
        fi = f[i]
        if fi == 0.0:
            continue
        for j in range(nk):
            out[i + j] += fi * k[j]
    return out_arr


def conv_full_2d(double[:, ::1] f, double[:, ::1] k):
    """Full discrete 2-D convolution by direct summation."""
    cdef Py_ssize_t nfx = f.shape[0], nfy = f.shape[1]
    cdef Py_ssize_t nkx = k.shape[0], nky = k.shape[1]
    out_arr = np.zeros((nfx + nkx - 1, nfy + nky - 1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, p, q
    cdef double fij
    for i in range(nfx):
        for j in range(nfy):
            fij = f[i, j]
            if fij == 0.0:
                continue
            for p in range(nkx):
                for q in range(nky):
                    out[i + p, j + q] += fij * k[p, q]
    return out_arr
