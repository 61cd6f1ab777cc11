"""Numba kernel implementations of the hot loops.

Same signatures as _kernels_numpy. Parallel loops only ever write
disjoint rows of preallocated outputs, so results are bit-reproducible
regardless of thread count; all cross-sample reductions happen in the
caller via np.sum on the returned arrays.
"""

import math

import numpy as np
from numba import njit, prange


@njit(cache=True, parallel=True)
def logq_gaussian(rx, points, inv_two_sigma2):
    n = rx.shape[0]
    M, D = points.shape
    out = np.empty((n, M))
    for i in prange(n):
        for j in range(M):
            d2 = 0.0
            for d in range(D):
                t = rx[i, d] - points[j, d]
                d2 += t * t
            out[i, j] = -inv_two_sigma2 * d2
    return out


@njit(cache=True, parallel=True)
def logq_pn(rx, rot, logw, inv_two_sigma2):
    n = rx.shape[0]
    M, K, D = rot.shape
    out = np.empty((n, M))
    for i in prange(n):
        tmp = np.empty(K)
        for j in range(M):
            mx = -np.inf
            for k in range(K):
                d2 = 0.0
                for d in range(D):
                    t = rx[i, d] - rot[j, k, d]
                    d2 += t * t
                val = logw[k] - inv_two_sigma2 * d2
                tmp[k] = val
                if val > mx:
                    mx = val
            acc = 0.0
            for k in range(K):
                acc += math.exp(tmp[k] - mx)
            out[i, j] = mx + math.log(acc)
    return out


@njit(cache=True, parallel=True)
def hard_decisions(rx, points):
    n = rx.shape[0]
    M, D = points.shape
    out = np.empty(n, dtype=np.int64)
    for i in prange(n):
        best = 0
        best_d2 = np.inf
        for j in range(M):
            d2 = 0.0
            for d in range(D):
                t = rx[i, d] - points[j, d]
                d2 += t * t
            if d2 < best_d2:  # strict: ties keep the lowest index
                best_d2 = d2
                best = j
        out[i] = best
    return out


@njit(cache=True, parallel=True)
def lvalue_reduce(w, logp, bits, clamp):
    n, M = w.shape
    m = bits.shape[1]
    out = np.empty((n, m))
    for i in prange(n):
        v = np.empty(M)
        for j in range(M):
            v[j] = w[i, j] + logp[j]
        for k in range(m):
            mx0 = -np.inf
            mx1 = -np.inf
            for j in range(M):
                if bits[j, k] == 0:
                    if v[j] > mx0:
                        mx0 = v[j]
                else:
                    if v[j] > mx1:
                        mx1 = v[j]
            s0 = 0.0
            s1 = 0.0
            for j in range(M):
                if bits[j, k] == 0:
                    s0 += math.exp(v[j] - mx0)
                else:
                    s1 += math.exp(v[j] - mx1)
            val = (mx0 + math.log(s0)) - (mx1 + math.log(s1))
            if val > clamp:
                val = clamp
            elif val < -clamp:
                val = -clamp
            out[i, k] = val
    return out


@njit(cache=True, parallel=True)
def air_reduce(w, tx0, bits):
    n, M = w.shape
    m = bits.shape[1]
    s_terms = np.empty(n)
    b_terms = np.empty(n)
    for i in prange(n):
        mx = -np.inf
        for j in range(M):
            if w[i, j] > mx:
                mx = w[i, j]
        acc = 0.0
        for j in range(M):
            acc += math.exp(w[i, j] - mx)
        lse_all = mx + math.log(acc)
        s_terms[i] = lse_all - w[i, tx0[i]]
        bt = 0.0
        for k in range(m):
            tb = bits[tx0[i], k]
            mxs = -np.inf
            for j in range(M):
                if bits[j, k] == tb and w[i, j] > mxs:
                    mxs = w[i, j]
            ss = 0.0
            for j in range(M):
                if bits[j, k] == tb:
                    ss += math.exp(w[i, j] - mxs)
            bt += lse_all - (mxs + math.log(ss))
        b_terms[i] = bt
    return s_terms, b_terms
