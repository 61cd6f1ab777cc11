"""Pure-numpy kernel implementations.

Fallback path for the hot loops; selected via PREFEC_BACKEND=numpy or when
numba is unavailable. Same call signatures as _kernels_numba. Callers
chunk the sample axis, so peak memory here is O(chunk * M).

Distances are computed as explicit differences, never via the expanded
||y||^2 - 2y.s + ||s||^2 form: the expansion loses the exact zero at
y == s, which matters when log q ratios are taken at very small sigma^2.
"""

import numpy as np


def logq_gaussian(rx, points, inv_two_sigma2):
    """log q table, q = exp(-||y - s||^2 / (2 sigma^2)). Returns (n, M)."""
    diff = rx[:, None, :] - points[None, :, :]
    return -inv_two_sigma2 * np.einsum("nmd,nmd->nm", diff, diff)


def logq_pn(rx, rot, logw, inv_two_sigma2):
    """log q table for a phase-marginalized Gaussian metric.

    rot holds the constellation rotated to each quadrature node,
    shape (M, K, D); logw the log quadrature weights, shape (K,).
    Accumulates over nodes with a running logaddexp so only one
    (n, M) panel is alive per node.
    """
    n = rx.shape[0]
    M, K, _ = rot.shape
    out = np.full((n, M), -np.inf)
    for k in range(K):
        diff = rx[:, None, :] - rot[None, :, k, :]
        d2 = np.einsum("nmd,nmd->nm", diff, diff)
        np.logaddexp(out, logw[k] - inv_two_sigma2 * d2, out=out)
    return out


def hard_decisions(rx, points):
    """Index of the nearest point per row, 0-based. Ties go to the lowest index."""
    diff = rx[:, None, :] - points[None, :, :]
    d2 = np.einsum("nmd,nmd->nm", diff, diff)
    return np.argmin(d2, axis=1).astype(np.int64)


def _lse_columns(v, cols):
    sub = v[:, cols]
    mx = np.max(sub, axis=1)
    with np.errstate(invalid="ignore"):
        s = np.sum(np.exp(sub - mx[:, None]), axis=1)
    return mx + np.log(s)


def lvalue_reduce(w, logp, bits, clamp):
    """Per-bit log-probability ratios from a log q table.

    w (n, M) log metric values, logp (M,) log symbol weights (may contain
    -inf for zero-probability symbols as long as each bit side keeps at
    least one finite entry), bits (M, m) 0/1 labels. Returns (n, m),
    saturated at +-clamp.
    """
    v = w + logp[None, :]
    n = w.shape[0]
    m = bits.shape[1]
    out = np.empty((n, m))
    for k in range(m):
        ones = bits[:, k] == 1
        out[:, k] = _lse_columns(v, ~ones) - _lse_columns(v, ones)
    return np.clip(out, -clamp, clamp, out=out)


def air_reduce(w, tx0, bits):
    """Per-sample information losses for the symbol-wise and bit-wise AIR sums.

    Returns (s_terms, b_terms) in nats:
      s_terms[i] = lse_j w[i,j] - w[i, tx0[i]]
      b_terms[i] = sum_k ( lse_j w[i,j] - lse_{j: b_k(j)=b_k(tx)} w[i,j] )
    Uniform symbol weights are assumed (no logp here by design).
    """
    n, _ = w.shape
    m = bits.shape[1]
    mx = np.max(w, axis=1)
    lse_all = mx + np.log(np.sum(np.exp(w - mx[:, None]), axis=1))
    s_terms = lse_all - w[np.arange(n), tx0]
    b_terms = np.zeros(n)
    for k in range(m):
        ones = bits[:, k] == 1
        lse0 = _lse_columns(w, ~ones)
        lse1 = _lse_columns(w, ones)
        tx_is_one = bits[tx0, k] == 1
        b_terms += lse_all - np.where(tx_is_one, lse1, lse0)
    return s_terms, b_terms
