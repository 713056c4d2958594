"""Interpreted implementations of the hot kernels.

These mirror ``_native.pyx`` line for line and are used whenever the compiled
extension is unavailable (or ``KPRABHAKAR_BACKEND=python`` is set).
"""

from __future__ import annotations

import math

import numpy as np


def ml_series(log_coef, sign_coef, z, tol):
    """Sum ``sum_n sign_n * exp(log_coef_n) * z**n`` for every entry of ``z``.

    Stops at the first index ``n >= 1`` where the term is below ``tol`` times
    the partial sum, the term ratio is below one, and the geometric tail
    estimate is below ``tol * max(1, |sum|)``.

    Returns ``(values, terms_used, tail_bounds, converged)``.
    """
    log_coef = np.ascontiguousarray(log_coef, dtype=np.float64)
    sign_coef = np.ascontiguousarray(sign_coef, dtype=np.float64)
    z = np.ascontiguousarray(z, dtype=np.float64)
    ncoef = log_coef.shape[0]
    m = z.shape[0]
    values = np.empty(m)
    terms = np.empty(m, dtype=np.int64)
    tails = np.empty(m)
    converged = np.zeros(m, dtype=np.uint8)

    lc = log_coef.tolist()
    sc = sign_coef.tolist()
    for idx, zi in enumerate(z.tolist()):
        if zi == 0.0:
            values[idx] = sc[0] * math.exp(lc[0]) if sc[0] != 0.0 else 0.0
            terms[idx] = 1
            tails[idx] = 0.0
            converged[idx] = 1
            continue
        lz = math.log(abs(zi))
        neg = zi < 0.0
        total = 0.0
        prev = 0.0
        done = False
        tail = math.inf
        used = ncoef
        for n in range(ncoef):
            if sc[n] == 0.0:
                term = 0.0
            else:
                try:
                    term = sc[n] * math.exp(lc[n] + n * lz)
                except OverflowError:  # C's exp saturates to inf instead
                    term = sc[n] * math.inf
                if neg and (n & 1):
                    term = -term
            total += term
            mag = abs(term)
            if n >= 1:
                if prev == 0.0:
                    ratio = 0.0 if mag == 0.0 else math.inf
                else:
                    ratio = mag / prev
                if ratio < 1.0 and mag <= tol * abs(total):
                    tail = mag * ratio / (1.0 - ratio) if ratio > 0.0 else 0.0
                    if tail <= tol * max(1.0, abs(total)):
                        done = True
                        used = n + 1
                        break
            prev = mag
        if not done:
            tail = prev
        if not math.isfinite(total):
            done = False
        values[idx] = total
        terms[idx] = used
        tails[idx] = tail
        converged[idx] = 1 if done else 0
    return values, terms, tails, converged


def kernel_weights(alphas, log_scales, signs, n):
    """Node weights of the product trapezoid rule for a sum of power kernels.

    The kernel is ``sum_j c_j * s**(alphas_j - 1)`` integrated against a
    piecewise-linear function on ``n`` equal cells of a window of length
    ``H``. Amplitudes are passed as ``signs_j`` and
    ``log_scales_j = log|c_j| + alphas_j * log(H)`` so that large powers of
    ``H`` never overflow on their own.

    Returns ``(toeplitz, start)`` where the integral up to node ``i`` is
    ``sum_{d<i} toeplitz[d] * f[i-d] + start[i] * f[0]``.
    """
    alphas = np.asarray(alphas, dtype=np.float64)
    toeplitz = np.zeros(n + 1)
    start = np.zeros(n + 1)
    d = np.arange(n + 1, dtype=np.float64)
    frac = d / n
    with np.errstate(divide="ignore"):
        logf = np.log(frac)
    for alpha, log_scale, sign in zip(alphas.tolist(), np.asarray(log_scales).tolist(),
                                      np.asarray(signs).tolist()):
        if sign == 0.0:
            continue
        scale = sign * math.exp(log_scale)
        if scale == 0.0:
            continue
        p0 = np.exp(alpha * logf)
        p1 = p0 * frac
        # A[d], Bm[d] for the cell whose far end sits at distance d (d >= 1)
        a = np.zeros(n + 2)
        bm = np.zeros(n + 2)
        a[1:n + 1] = (p0[1:] - p0[:-1]) / alpha
        bm[1:n + 1] = n * (p1[1:] - p1[:-1]) / (alpha + 1.0) - d[:-1] * a[1:n + 1]
        t = np.empty(n + 1)
        t[0] = a[1] - bm[1]
        t[1:n] = bm[1:n] + a[2:n + 1] - bm[2:n + 1]
        t[n] = bm[n]
        toeplitz += scale * t
        start += scale * bm[:n + 1]
    return toeplitz, start


def causal_apply(toeplitz, start, f):
    """``out[i] = sum_{d<i} toeplitz[d] * f[i-d] + start[i] * f[0]``; ``out[0] = 0``."""
    toeplitz = np.asarray(toeplitz, dtype=np.float64)
    start = np.asarray(start, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    m = f.shape[0]
    out = np.zeros(m)
    tl = toeplitz.tolist()
    fl = f.tolist()
    sl = start.tolist()
    for i in range(1, m):
        acc = 0.0
        for d in range(i):
            acc += tl[d] * fl[i - d]
        out[i] = acc + sl[i] * fl[0]
    return out
