"""Pre-FEC metric recipes.

Hard-decision error rates and their Q-factor / rate counterparts, the
symbol-wise and bit-wise achievable information rates of a mismatched
decoder, and the L-value route (histogram, asymmetric information,
shaped pre-FEC rate and bit error probability) that also covers shaped
constellations.

Everything here is a pure function of its inputs. Parallel kernels fill
per-sample term arrays which are reduced with a single np.sum, so
results do not depend on thread count.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from ._backend import iter_chunks, kernels
from .channels import Trace
from .errors import (
    ConfigurationError,
    DimensionMismatchError,
    OutOfDomainError,
    UnsupportedInputError,
)
from .metrics import LValueSet, MetricFunction, gaussian_q

__all__ = [
    "hard_decide",
    "ser",
    "ber",
    "erfc_inv",
    "q_hard",
    "binary_entropy",
    "air_b_hd",
    "air_s",
    "air_b",
    "air_pair",
    "j_function",
    "j_inverse",
    "q_soft",
    "HistogramSpec",
    "LHistogram",
    "build_lvalue_histogram",
    "asi",
    "air_b_ps",
    "preber_ps",
    "net_rate_ps",
    "optimize_sigma_scale",
    "MetricReport",
    "REPORT_UNITS",
]

_LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# hard decisions and error counting


def hard_decide(trace: Trace) -> np.ndarray:
    """Nearest-point decisions, 1-based. Ties resolve to the lowest index."""
    n = trace.N
    out = np.empty(n, dtype=np.int64)
    for start, stop in iter_chunks(n):
        out[start:stop] = kernels.hard_decisions(
            trace.rx[start:stop], trace.constellation.points
        )
    return out + 1


def _check_decisions(trace: Trace, decisions: np.ndarray) -> np.ndarray:
    d = np.asarray(decisions, dtype=np.int64)
    if d.shape != trace.tx_indices.shape:
        raise DimensionMismatchError("decisions must have one entry per trace sample")
    if d.min() < 1 or d.max() > trace.constellation.M:
        raise DimensionMismatchError("decisions must be 1-based symbol indices")
    return d


def ser(trace: Trace, decisions: np.ndarray) -> float:
    """Symbol error rate, (1/N) |{i_hat_n != i_n}|."""
    d = _check_decisions(trace, decisions)
    return float(np.mean(d != trace.tx_indices))


def ber(trace: Trace, decisions: np.ndarray) -> float:
    """Bit error rate over the m label bits of each decision."""
    d = _check_decisions(trace, decisions)
    labels = trace.constellation.labels
    return float(np.mean(labels[d - 1] != labels[trace.tx_indices - 1]))


# ---------------------------------------------------------------------------
# Gaussian tail inverse and hard-decision rates

# Rational approximation of the inverse normal CDF (Acklam), used as the
# starting point; two Newton refinements on math.erfc finish the job.
_ACK_A = (
    -3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
    1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00,
)
_ACK_B = (
    -5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
    6.680131188771972e01, -1.328068155288572e01,
)
_ACK_C = (
    -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
    -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00,
)
_ACK_D = (
    7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
    3.754408661907416e00,
)
_ACK_P_LOW = 0.02425


def _inv_norm_cdf(p: float) -> float:
    a, b, c, d = _ACK_A, _ACK_B, _ACK_C, _ACK_D
    if p < _ACK_P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    if p <= 1.0 - _ACK_P_LOW:
        q = p - 0.5
        r = q * q
        return (
            (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5])
            * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
        )
    q = math.sqrt(-2.0 * math.log1p(-p))
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
        (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
    )


def erfc_inv(y: float) -> float:
    """Inverse of erfc on (0, 2): rational initial guess plus two Newton steps."""
    if not (0.0 < y < 2.0):
        raise OutOfDomainError(f"erfc_inv needs 0 < y < 2, got {y}")
    if y == 1.0:
        return 0.0
    x = -_inv_norm_cdf(0.5 * y) / math.sqrt(2.0)
    half_sqrt_pi = 0.5 * math.sqrt(math.pi)
    for _ in range(2):
        x += (math.erfc(x) - y) * half_sqrt_pi * math.exp(x * x)
    return x


def q_hard(p_b: float) -> float:
    """Q-factor implied by a hard-decision bit error probability.

    sqrt(2) * erfc_inv(2 p_b); the amplitude SNR of the binary AWGN
    channel whose tail probability equals p_b. p_b in {0, 1} has no
    finite Q, so a signed infinity sentinel is returned with a warning.
    """
    if not (0.0 <= p_b <= 1.0):
        raise OutOfDomainError(f"p_b must lie in [0, 1], got {p_b}")
    if p_b == 0.0 or p_b == 1.0:
        warnings.warn(f"q_hard is unbounded at p_b={p_b}, returning a sentinel")
        return math.inf if p_b == 0.0 else -math.inf
    return math.sqrt(2.0) * erfc_inv(2.0 * p_b)


def binary_entropy(p: float) -> float:
    """H2(p) in bits, with H2(0) = H2(1) = 0."""
    if not (0.0 <= p <= 1.0):
        raise OutOfDomainError(f"binary_entropy needs p in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def air_b_hd(p_b: float, m: int) -> float:
    """Hard-decision achievable rate m (1 - H2(p_b)) in bit/symbol."""
    if m < 1:
        raise OutOfDomainError("m must be a positive bit count")
    return m * (1.0 - binary_entropy(p_b))


# ---------------------------------------------------------------------------
# soft achievable information rates (uniform inputs)

_UNIFORM_HINT = (
    "requires uniform symbol probabilities; for shaped inputs use the "
    "L-value route: compute_lvalues -> build_lvalue_histogram -> asi -> air_b_ps"
)


def _air_terms(trace: Trace, metric: MetricFunction):
    c = trace.constellation
    if not c.is_uniform():
        raise UnsupportedInputError(f"air_s/air_b {_UNIFORM_HINT}")
    n = trace.N
    s_terms = np.empty(n)
    b_terms = np.empty(n)
    tx0 = trace.tx_indices - 1
    for start, stop in iter_chunks(n):
        w = metric.log_q_table(trace.rx[start:stop], c.points)
        s_terms[start:stop], b_terms[start:stop] = kernels.air_reduce(
            w, tx0[start:stop], c.labels
        )
    return s_terms, b_terms


def air_pair(trace: Trace, metric: MetricFunction) -> tuple[float, float]:
    """(air_s, air_b) from one pass over the trace."""
    s_terms, b_terms = _air_terms(trace, metric)
    m = trace.constellation.m
    inv = 1.0 / (trace.N * _LN2)
    return m - float(np.sum(s_terms)) * inv, m - float(np.sum(b_terms)) * inv


def air_s(trace: Trace, metric: MetricFunction) -> float:
    """Symbol-metric achievable rate of a (possibly mismatched) decoder, bit/symbol.

    m - (1/N) sum_n [ log2 sum_j q(y_n, s_j) - log2 q(y_n, s(i_n)) ].
    Uniform inputs only; may be negative for badly mismatched metrics,
    reported as computed.
    """
    return air_pair(trace, metric)[0]


def air_b(trace: Trace, metric: MetricFunction) -> float:
    """Bit-metric (BICM) achievable rate of a mismatched decoder, bit/symbol."""
    return air_pair(trace, metric)[1]


# ---------------------------------------------------------------------------
# J-function (binary-input AWGN information curve) and soft Q-factor

_J_ORDER = 64
_J_SIGMA_MAX = 100.0


def _softplus(z: float) -> float:
    if z > 0:
        return z + math.log1p(math.exp(-z))
    return math.log1p(math.exp(z))


def j_function(sigma: float) -> float:
    """Mutual information of the consistent Gaussian L-value channel.

    L ~ N(sigma^2/2, sigma^2) for the transmitted bit; J(sigma) =
    1 - E[log2(1 + exp(-L))], evaluated with order-64 Gauss-Hermite
    quadrature. Monotone increasing from J(0) = 0 toward 1.
    """
    if not (sigma >= 0 and math.isfinite(sigma)):
        raise OutOfDomainError(f"sigma must be nonnegative and finite, got {sigma}")
    if sigma == 0.0:
        return 0.0
    x, w = np.polynomial.hermite.hermgauss(_J_ORDER)
    mu = 0.5 * sigma * sigma
    acc = 0.0
    for xk, wk in zip(x, w):
        acc += wk * _softplus(-(mu + sigma * math.sqrt(2.0) * xk))
    return 1.0 - acc / (math.sqrt(math.pi) * _LN2)


def j_inverse(rate: float) -> float:
    """Inverse of j_function by bisection on sigma in [0, 100]."""
    if not (0.0 <= rate < 1.0):
        raise OutOfDomainError(f"j_inverse needs rate in [0, 1), got {rate}")
    if rate == 0.0:
        return 0.0
    lo, hi = 0.0, _J_SIGMA_MAX
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if j_function(mid) < rate:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-10:
            break
    return 0.5 * (lo + hi)


def q_soft(rate: float) -> float:
    """Q-factor implied by a soft bit rate (per-bit AIR or ASI), linear."""
    if not (0.0 <= rate < 1.0):
        raise OutOfDomainError(f"q_soft needs rate in [0, 1), got {rate}")
    return math.sqrt(j_inverse(rate) / 2.0)


# ---------------------------------------------------------------------------
# L-value histogram, asymmetric information, shaped pre-FEC metrics


@dataclass(frozen=True)
class HistogramSpec:
    """Uniform histogram with bins centered at (2j - 1 - bins) * delta, j = 1..bins."""

    bins: int = 32
    delta: float = 1.0

    def __post_init__(self):
        if self.bins < 2:
            raise ConfigurationError(f"bins must be >= 2, got {self.bins}")
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ConfigurationError(f"delta must be positive and finite, got {self.delta}")

    @property
    def centers(self) -> np.ndarray:
        j = np.arange(1, self.bins + 1)
        return (2 * j - 1 - self.bins) * self.delta


@dataclass(frozen=True)
class LHistogram:
    """Quantized asymmetric L-value distribution.

    mass[j] = counts[j] / total; counts always sum to total exactly, so
    no sample is ever dropped (edges are captured by the outermost bins).
    """

    mass: np.ndarray
    counts: np.ndarray
    total: int
    spec: HistogramSpec

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        mass = np.asarray(self.mass, dtype=np.float64)
        if counts.shape != (self.spec.bins,) or mass.shape != (self.spec.bins,):
            raise DimensionMismatchError("histogram arrays must match spec.bins")
        if int(counts.sum()) != self.total:
            raise OutOfDomainError("histogram counts must sum to the total sample count")
        if abs(math.fsum(mass.tolist()) - 1.0) > 1e-12:
            raise OutOfDomainError("histogram mass must sum to 1")
        counts.setflags(write=False)
        mass.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "mass", mass)


def build_lvalue_histogram(lvalues: LValueSet, spec: HistogramSpec = HistogramSpec()) -> LHistogram:
    """Quantize asymmetric L-values to the nearest bin center.

    Ties between two centers resolve to the lower bin index; values
    beyond the outermost centers land in the edge bins.
    """
    vals = np.asarray(lvalues.asymmetric, dtype=np.float64).ravel()
    b = spec.bins
    c0 = (1 - b) * spec.delta
    k = (vals - c0) / (2.0 * spec.delta)
    idx = np.ceil(k - 0.5).astype(np.int64)  # round half down: tie -> lower center
    np.clip(idx, 0, b - 1, out=idx)
    counts = np.bincount(idx, minlength=b).astype(np.int64)
    total = int(vals.size)
    return LHistogram(mass=counts / total, counts=counts, total=total, spec=spec)


def asi(histogram: LHistogram) -> float:
    """Asymmetric information of the L-value histogram, in bit.

    sum over nonempty bins of mass[j] * log2(2 mass[j] / (mass[j] +
    mass[mirror j])), mirror j being the bin at the opposite center.
    Computed from the integer counts so the ratios are exact.
    """
    c = histogram.counts.astype(np.float64)
    cm = c[::-1]
    nz = c > 0
    t = float(histogram.total)
    terms = (c[nz] / t) * (1.0 + np.log2(c[nz]) - np.log2(c[nz] + cm[nz]))
    return max(0.0, float(terms.sum()))


def air_b_ps(h_s: float, asi_value: float, m: int) -> float:
    """Shaped bit-wise achievable rate H_s - (1 - ASI) m, in bit/symbol."""
    if m < 1:
        raise OutOfDomainError("m must be a positive bit count")
    if not (0.0 < h_s <= m + 1e-12):
        raise OutOfDomainError(f"h_s must lie in (0, {m}], got {h_s}")
    if not (0.0 <= asi_value <= 1.0 + 1e-12):
        raise OutOfDomainError(f"asi must lie in [0, 1], got {asi_value}")
    return h_s - (1.0 - asi_value) * m


def preber_ps(lvalues: LValueSet) -> float:
    """Pre-FEC bit error probability from asymmetric L-values, P(L_a <= 0)."""
    return float(np.mean(lvalues.asymmetric <= 0.0))


def net_rate_ps(r_p: float, r_c: float, m: int) -> float:
    """Net data rate R_p - (1 - R_c) m of a shaped system with code rate R_c."""
    if m < 1:
        raise OutOfDomainError("m must be a positive bit count")
    if not (0.0 < r_c <= 1.0):
        raise OutOfDomainError(f"code rate must lie in (0, 1], got {r_c}")
    return r_p - (1.0 - r_c) * m


# ---------------------------------------------------------------------------
# mismatched-variance search


def optimize_sigma_scale(
    trace: Trace,
    base_sigma2: float,
    lo: float = 0.25,
    hi: float = 4.0,
    tol: float = 1e-4,
) -> tuple[float, float]:
    """Golden-section search of the Gaussian-metric variance scale maximizing air_b.

    Evaluates air_b(trace, gaussian_q(scale * base_sigma2)) over scale in
    [lo, hi] to the given tolerance, then also checks scale = 1 so the
    result never falls below the unscaled metric. Returns (scale, air_b).
    Each probe is a full pass over the trace.
    """
    if not (base_sigma2 > 0 and math.isfinite(base_sigma2)):
        raise OutOfDomainError("base_sigma2 must be positive and finite")
    if not (0 < lo < hi) or not (tol > 0):
        raise ConfigurationError("need 0 < lo < hi and tol > 0")

    def f(scale: float) -> float:
        return air_b(trace, gaussian_q(scale * base_sigma2))

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    best_scale = 0.5 * (a + b)
    best_air = f(best_scale)
    air_at_one = f(1.0)
    if air_at_one >= best_air:
        return 1.0, air_at_one
    return best_scale, best_air


# ---------------------------------------------------------------------------
# reporting

REPORT_UNITS = ("probability", "bit/symbol", "dB", "linear")


@dataclass(frozen=True)
class MetricReport:
    """One computed metric with units and provenance strings."""

    name: str
    value: float
    units: str
    config: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.name:
            raise ConfigurationError("metric name must be nonempty")
        if self.units not in REPORT_UNITS:
            raise ConfigurationError(
                f"units must be one of {REPORT_UNITS}, got {self.units!r}"
            )
        v = float(self.value)
        if self.units == "probability" and not (0.0 <= v <= 1.0):
            raise OutOfDomainError(f"probability metric {self.name} outside [0, 1]: {v}")
        object.__setattr__(self, "value", v)
        object.__setattr__(
            self, "config", MappingProxyType({str(k): str(val) for k, val in self.config.items()})
        )
