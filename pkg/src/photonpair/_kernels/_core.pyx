# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: cavity-comb amplitude sums and the streaming
coincidence correlator.  A numpy fallback with the same signatures lives
in ``fallback.py``; the package works without this extension."""

import numpy as np

cimport cython
from libc.math cimport cos, sin, exp, floor, M_PI


def comb_amplitude(double[::1] tau, double complex[::1] coefs, double fsr):
    """Real amplitude c_0 + 2*Re(sum_{m>=1} c_m * z^m), z = exp(-2j*pi*fsr*tau).

    ``coefs`` holds c_m for m = 0..M; negative modes are the complex
    conjugates, so the sum is real by construction.
    """
    cdef Py_ssize_t n = tau.shape[0]
    cdef Py_ssize_t nm = coefs.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t j, m
    cdef double theta, wr, wi, pr, pi, tr, acc
    with nogil:
        for j in range(n):
            theta = 2.0 * M_PI * fsr * tau[j]
            wr = cos(theta)
            wi = -sin(theta)
            pr = 1.0
            pi = 0.0
            acc = coefs[0].real
            for m in range(1, nm):
                tr = pr * wr - pi * wi
                pi = pr * wi + pi * wr
                pr = tr
                acc += 2.0 * (coefs[m].real * pr - coefs[m].imag * pi)
            out[j] = acc
    return out_arr


def correlate_ticks(long long[::1] s, long long[::1] it, double tick,
                    double bin_width, double window, Py_ssize_t n_bins):
    """Histogram of delays (idler - signal) over all tag pairs.

    Both inputs must be sorted ascending.  A pair lands in bin
    floor((d*tick + window)/bin_width) when that index is in range; the
    scan over the idler stream uses a sliding window so the cost is
    O(n_s + n_i + matches).
    """
    cdef Py_ssize_t ns = s.shape[0]
    cdef Py_ssize_t ni = it.shape[0]
    counts_arr = np.zeros(n_bins, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    if ns == 0 or ni == 0 or n_bins <= 0:
        return counts_arr
    # loose tick bounds for the scan; exact bin test per candidate
    cdef long long d_lo = <long long>floor(-window / tick) - 1
    cdef long long d_hi = <long long>floor(window / tick) + 1
    cdef Py_ssize_t j, k, lo = 0
    cdef long long sj, d
    cdef double x
    cdef Py_ssize_t idx
    with nogil:
        for j in range(ns):
            sj = s[j]
            while lo < ni and it[lo] < sj + d_lo:
                lo += 1
            k = lo
            while k < ni and it[k] <= sj + d_hi:
                d = it[k] - sj
                x = (d * tick + window) / bin_width
                idx = <Py_ssize_t>floor(x)
                if 0 <= idx < n_bins:
                    counts[idx] += 1
                k += 1
    return counts_arr
