# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for the chain simulator.

Signatures mirror :mod:`mrfmqc._purepy` exactly; see that module for the
reference semantics.
"""
from libc.math cimport cos, sin, sqrt, M_PI

import numpy as np
cimport numpy as cnp

cnp.import_array()


def rotate_pairs(double complex[::1] amps, Py_ssize_t bit, const double[::1] detuning,
                 double rabi, double phase, double duration):
    cdef Py_ssize_t npairs = amps.shape[0] // 2
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << bit
    cdef Py_ssize_t mask = stride - 1
    cdef Py_ssize_t p, i0, i1
    cdef double d, wg, theta, c, s, nz, nxy
    cdef double complex a0, a1, u00, u01, u10, u11
    cdef double complex eph = cos(phase) + 1j * sin(phase)
    cdef double complex emph = cos(phase) - 1j * sin(phase)
    if detuning.shape[0] != npairs:
        raise ValueError("detuning length must equal the number of pairs")
    for p in range(npairs):
        i0 = ((p >> bit) << (bit + 1)) | (p & mask)
        i1 = i0 | stride
        d = detuning[p]
        wg = sqrt(rabi * rabi + d * d)
        theta = M_PI * wg * duration
        c = cos(theta)
        s = sin(theta)
        nz = d / wg
        nxy = rabi / wg
        u00 = c - 1j * s * nz
        u11 = c + 1j * s * nz
        u01 = -1j * s * nxy * emph
        u10 = -1j * s * nxy * eph
        a0 = amps[i0]
        a1 = amps[i1]
        amps[i0] = u00 * a0 + u01 * a1
        amps[i1] = u10 * a0 + u11 * a1


def dipole_fields(const double[::1] signs, double per_pair):
    cdef Py_ssize_t n = signs.shape[0]
    cdef Py_ssize_t j, k, dist
    cdef double acc, r
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] view = out
    for j in range(n):
        acc = 0.0
        for k in range(n):
            if k == j:
                continue
            dist = k - j if k > j else j - k
            r = <double>dist
            acc += signs[k] / (r * r * r)
        view[j] = per_pair * acc
    return out
