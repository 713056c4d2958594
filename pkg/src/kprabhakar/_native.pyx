# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in ``_fallback``.

Semantics, including the truncation rule and summation order, are identical
to the interpreted versions; only the loop overhead differs.
"""

import numpy as np

from libc.math cimport exp, fabs, isfinite, log, INFINITY


def ml_series(log_coef, sign_coef, z, double tol):
    cdef const double[::1] lc = np.ascontiguousarray(log_coef, dtype=np.float64)
    cdef const double[::1] sc = np.ascontiguousarray(sign_coef, dtype=np.float64)
    cdef const double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t ncoef = lc.shape[0]
    cdef Py_ssize_t m = zv.shape[0]

    values_arr = np.empty(m)
    terms_arr = np.empty(m, dtype=np.int64)
    tails_arr = np.empty(m)
    conv_arr = np.zeros(m, dtype=np.uint8)
    cdef double[::1] values = values_arr
    cdef long long[::1] terms = terms_arr
    cdef double[::1] tails = tails_arr
    cdef unsigned char[::1] converged = conv_arr

    cdef Py_ssize_t idx, n, used
    cdef double zi, lz, total, prev, term, mag, ratio, tail, bigger
    cdef bint neg, done

    for idx in range(m):
        zi = zv[idx]
        if zi == 0.0:
            values[idx] = sc[0] * exp(lc[0]) if sc[0] != 0.0 else 0.0
            terms[idx] = 1
            tails[idx] = 0.0
            converged[idx] = 1
            continue
        lz = log(fabs(zi))
        neg = zi < 0.0
        total = 0.0
        prev = 0.0
        done = False
        tail = INFINITY
        used = ncoef
        for n in range(ncoef):
            if sc[n] == 0.0:
                term = 0.0
            else:
                term = sc[n] * exp(lc[n] + n * lz)
                if neg and (n & 1):
                    term = -term
            total += term
            mag = fabs(term)
            if n >= 1:
                if prev == 0.0:
                    ratio = 0.0 if mag == 0.0 else INFINITY
                else:
                    ratio = mag / prev
                if ratio < 1.0 and mag <= tol * fabs(total):
                    tail = mag * ratio / (1.0 - ratio) if ratio > 0.0 else 0.0
                    bigger = fabs(total) if fabs(total) > 1.0 else 1.0
                    if tail <= tol * bigger:
                        done = True
                        used = n + 1
                        break
            prev = mag
        if not done:
            tail = prev
        if not isfinite(total):
            done = False
        values[idx] = total
        terms[idx] = used
        tails[idx] = tail
        converged[idx] = 1 if done else 0
    return values_arr, terms_arr, tails_arr, conv_arr


def kernel_weights(alphas, log_scales, signs, Py_ssize_t n):
    cdef const double[::1] al = np.ascontiguousarray(alphas, dtype=np.float64)
    cdef const double[::1] ls = np.ascontiguousarray(log_scales, dtype=np.float64)
    cdef const double[::1] sg = np.ascontiguousarray(signs, dtype=np.float64)
    toeplitz_arr = np.zeros(n + 1)
    start_arr = np.zeros(n + 1)
    cdef double[::1] toeplitz = toeplitz_arr
    cdef double[::1] start = start_arr
    cdef double[::1] a = np.zeros(n + 2)
    cdef double[::1] bm = np.zeros(n + 2)
    cdef double[::1] p0 = np.empty(n + 1)
    cdef double[::1] p1 = np.empty(n + 1)
    cdef double[::1] frac = np.empty(n + 1)
    cdef double[::1] logf = np.empty(n + 1)

    cdef Py_ssize_t j, d
    cdef double alpha, scale, t

    for d in range(1, n + 1):
        frac[d] = <double>d / <double>n
        logf[d] = log(frac[d])

    for j in range(al.shape[0]):
        if sg[j] == 0.0:
            continue
        scale = sg[j] * exp(ls[j])
        if scale == 0.0:
            continue
        alpha = al[j]
        p0[0] = 0.0
        p1[0] = 0.0
        for d in range(1, n + 1):
            p0[d] = exp(alpha * logf[d])
            p1[d] = p0[d] * frac[d]
        for d in range(1, n + 1):
            a[d] = (p0[d] - p0[d - 1]) / alpha
            bm[d] = n * (p1[d] - p1[d - 1]) / (alpha + 1.0) - (d - 1) * a[d]
        toeplitz[0] += scale * (a[1] - bm[1])
        for d in range(1, n):
            toeplitz[d] += scale * (bm[d] + a[d + 1] - bm[d + 1])
        toeplitz[n] += scale * bm[n]
        for d in range(1, n + 1):
            start[d] += scale * bm[d]
    return toeplitz_arr, start_arr


def causal_apply(toeplitz, start, f):
    cdef const double[::1] tl = np.ascontiguousarray(toeplitz, dtype=np.float64)
    cdef const double[::1] sl = np.ascontiguousarray(start, dtype=np.float64)
    cdef const double[::1] fl = np.ascontiguousarray(f, dtype=np.float64)
    cdef Py_ssize_t m = fl.shape[0]
    out_arr = np.zeros(m)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, d
    cdef double acc
    for i in range(1, m):
        acc = 0.0
        for d in range(i):
            acc += tl[d] * fl[i - d]
        out[i] = acc + sl[i] * fl[0]
    return out_arr
