"""Decoding metrics q(y, s) and per-bit L-values.

All metric evaluation happens in the log domain. A MetricFunction knows
how to produce the (chunk, M) table of log q(y_n, s_j) values that the
reduction kernels consume; scalar/broadcast evaluation is available as
log_q for tests and small inputs.

The phase-marginalized metric integrates the Gaussian metric over a
N(0, sigma_theta2) rotation angle with Gauss-Hermite quadrature. Its
sigma_theta2 -> 0 limit is the plain Gaussian metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from ._backend import iter_chunks, kernels
from .channels import Trace
from .errors import (
    ConfigurationError,
    DegenerateLabelingError,
    DimensionMismatchError,
    OutOfDomainError,
)

__all__ = [
    "MetricFunction",
    "LValueSet",
    "gaussian_q",
    "pn_matched_q",
    "custom_q",
    "estimate_sigma2",
    "compute_lvalues",
    "LLR_CLAMP_DEFAULT",
    "DEFAULT_QUADRATURE_ORDER",
]

LLR_CLAMP_DEFAULT = 50.0
DEFAULT_QUADRATURE_ORDER = 32
_MIN_QUADRATURE_ORDER = 8


@lru_cache(maxsize=None)
def _hermgauss(order: int):
    x, w = np.polynomial.hermite.hermgauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class MetricFunction:
    """Immutable decoding metric. Use gaussian_q / pn_matched_q / custom_q."""

    kind: str
    params: dict
    _log_q: Callable = field(repr=False)
    _table: Callable = field(repr=False)

    def log_q(self, y, s):
        """log q for broadcastable stacks of vectors y, s with shape (..., D)."""
        return self._log_q(np.asarray(y, dtype=np.float64), np.asarray(s, dtype=np.float64))

    def evaluate(self, y, s):
        """q itself; prefer log_q for anything numerically serious."""
        return np.exp(self.log_q(y, s))

    def log_q_table(self, rx, points):
        """(n, M) table of log q(rx[i], points[j]). Hot path."""
        return self._table(np.ascontiguousarray(rx), np.ascontiguousarray(points))


def gaussian_q(sigma2: float) -> MetricFunction:
    """q(y, s) = exp(-||y - s||^2 / (2 sigma2)), the Euclidean-distance metric."""
    if not (math.isfinite(sigma2) and sigma2 > 0):
        raise OutOfDomainError(f"sigma2 must be positive and finite, got {sigma2}")
    inv2s2 = 0.5 / sigma2

    def _log_q(y, s):
        return -inv2s2 * np.sum((y - s) ** 2, axis=-1)

    def _table(rx, points):
        return kernels.logq_gaussian(rx, points, inv2s2)

    return MetricFunction("gaussian", {"sigma2": sigma2}, _log_q, _table)


def _pn_nodes(sigma_theta2: float, order: int):
    # E_theta f(theta) for theta ~ N(0, st2) via Gauss-Hermite:
    # sum_k (w_k / sqrt(pi)) f(sqrt(2 st2) x_k). Weights are normalized so
    # the st2 -> 0 limit reproduces the plain Gaussian metric exactly.
    x, w = _hermgauss(order)
    theta = math.sqrt(2.0 * sigma_theta2) * x
    logw = np.log(w) - 0.5 * math.log(math.pi)
    return theta, logw


def pn_matched_q(
    sigma_theta2: float,
    sigma_z2: float,
    quadrature_order: int = DEFAULT_QUADRATURE_ORDER,
) -> MetricFunction:
    """Gaussian metric marginalized over a Gaussian phase rotation of s.

    q(y, s) = E_theta exp(-||y - R(theta) s||^2 / (2 sigma_z2)),
    theta ~ N(0, sigma_theta2), evaluated with Gauss-Hermite quadrature
    of the given order (default 32, minimum 8). Only D = 2 inputs make
    sense since R is a plane rotation.
    """
    if not (math.isfinite(sigma_theta2) and sigma_theta2 >= 0):
        raise OutOfDomainError("sigma_theta2 must be nonnegative and finite")
    if not (math.isfinite(sigma_z2) and sigma_z2 > 0):
        raise OutOfDomainError("sigma_z2 must be positive and finite")
    if quadrature_order < _MIN_QUADRATURE_ORDER:
        raise ConfigurationError(
            f"quadrature order must be >= {_MIN_QUADRATURE_ORDER}, got {quadrature_order}"
        )
    inv2s2 = 0.5 / sigma_z2
    theta, logw = _pn_nodes(sigma_theta2, quadrature_order)
    cos_t, sin_t = np.cos(theta), np.sin(theta)

    def _rotate(points):
        if points.shape[-1] != 2:
            raise DimensionMismatchError("pn-matched metric needs 2-dimensional points")
        # (M, K, 2): every point at every quadrature angle
        x, y = points[..., 0], points[..., 1]
        rot = np.empty(points.shape[:-1] + (theta.size, 2))
        rot[..., 0] = x[..., None] * cos_t - y[..., None] * sin_t
        rot[..., 1] = x[..., None] * sin_t + y[..., None] * cos_t
        return rot

    def _log_q(y, s):
        rot = _rotate(s)  # (..., K, 2)
        d2 = np.sum((y[..., None, :] - rot) ** 2, axis=-1)
        return np.logaddexp.reduce(logw - inv2s2 * d2, axis=-1)

    def _table(rx, points):
        rot = np.ascontiguousarray(_rotate(points))
        return kernels.logq_pn(rx, rot, logw, inv2s2)

    return MetricFunction(
        "pn-matched",
        {
            "sigma_theta2": sigma_theta2,
            "sigma_z2": sigma_z2,
            "quadrature_order": quadrature_order,
        },
        _log_q,
        _table,
    )


def custom_q(log_q: Callable, name: str = "custom") -> MetricFunction:
    """Wrap a user-supplied broadcasting log q(y, s) callable.

    The callable must accept stacks shaped (..., D) and return finite
    values for finite inputs (q strictly positive). The table path feeds
    it (n, 1, D) against (M, D).
    """

    def _table(rx, points):
        return np.asarray(log_q(rx[:, None, :], points[None, :, :]), dtype=np.float64)

    return MetricFunction(name, {}, log_q, _table)


def estimate_sigma2(trace: Trace) -> float:
    """Per-dimension noise variance estimate against the known transmitted points.

    (1 / (D N)) sum_n ||y_n - s(i_n)||^2. For mismatched channels this
    absorbs everything the Gaussian metric cannot model (for instance the
    rotation residual of phase noise), which is exactly what a
    distance-matched receiver would estimate.
    """
    diff = trace.rx - trace.tx_points()
    return float(np.mean(diff * diff))


@dataclass(frozen=True)
class LValueSet:
    """Per-bit L-values of a trace.

    values     : (N, m) L-values, ln p(b=0|..)/p(b=1|..) flavored ratios
    asymmetric : (N, m) values with the transmitted bit's sign folded in,
                 a[n,k] = (-1)^{b_k(i_n)} values[n,k]
    clamp      : saturation bound applied to values (and hence asymmetric)
    """

    values: np.ndarray
    asymmetric: np.ndarray
    clamp: float

    def __post_init__(self):
        v = np.asarray(self.values)
        a = np.asarray(self.asymmetric)
        if v.ndim != 2 or v.shape != a.shape:
            raise DimensionMismatchError("values and asymmetric must share a (N, m) shape")
        if not (self.clamp > 0):
            raise OutOfDomainError("clamp must be positive")
        if not (np.all(np.isfinite(v)) and np.abs(v).max(initial=0.0) <= self.clamp):
            raise OutOfDomainError("L-values must be finite and within the clamp")
        v.setflags(write=False)
        a.setflags(write=False)


def compute_lvalues(trace: Trace, metric: MetricFunction, clamp: float = LLR_CLAMP_DEFAULT) -> LValueSet:
    """Per-bit L-values, numerator bit 0, weighted by the symbol probabilities.

    L[n,k] = ln sum_{j: b_k(j)=0} p_j q(y_n, s_j)
           - ln sum_{j: b_k(j)=1} p_j q(y_n, s_j),  saturated at +-clamp.
    """
    if not (clamp > 0 and math.isfinite(clamp)):
        raise OutOfDomainError("clamp must be positive and finite")
    c = trace.constellation
    bits = c.labels
    p = c.probs
    for k in range(c.m):
        side1 = bits[:, k] == 1
        if p[side1].sum() <= 0.0 or p[~side1].sum() <= 0.0:
            raise DegenerateLabelingError(
                f"bit position {k} carries all probability on one bit value; "
                "L-values are undefined"
            )
    with np.errstate(divide="ignore"):
        logp = np.where(p > 0, np.log(np.where(p > 0, p, 1.0)), -np.inf)
    n = trace.N
    values = np.empty((n, c.m))
    for start, stop in iter_chunks(n):
        w = metric.log_q_table(trace.rx[start:stop], c.points)
        values[start:stop] = kernels.lvalue_reduce(w, logp, bits, clamp)
    tx_bits = bits[trace.tx_indices - 1]
    asymmetric = np.where(tx_bits == 1, -values, values)
    return LValueSet(values=values, asymmetric=asymmetric, clamp=clamp)
