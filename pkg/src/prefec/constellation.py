"""Constellations, bit labelings, and probabilistic shaping.

Conventions used throughout the package:

* Symbol indices are 1-based, ``1 <= i <= M``, everywhere a user sees them
  (traces, hard decisions). Internal array code subtracts 1.
* Labels are fixed-length bit rows; bit 0 of a label row is the first
  (most significant) bit of the printed label string.
* Square QAM uses odd-integer coordinates per dimension and a
  binary-reflected Gray code applied independently per dimension. The
  first half of the label bits follows the second (vertical) coordinate,
  the second half the first (horizontal) coordinate, and the smallest
  coordinate maps to the all-zeros Gray word. Index order is the Gray
  cycle walk that puts index 1 at the top-right corner; for 4-QAM this
  yields the layout

      index 1 at (+1,+1) label 11      index 2 at (-1,+1) label 10
      index 3 at (-1,-1) label 00      index 4 at (+1,-1) label 01

* PAM (one-dimensional) orders points by ascending amplitude and puts the
  all-zeros label on the most positive amplitude, so for 2-PAM the bit 0
  decision region is the positive half-line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    InfeasibleShapingError,
    OutOfDomainError,
    UnsupportedConstellationError,
    UnsupportedInputError,
)

__all__ = [
    "Constellation",
    "ShapingSpec",
    "build_square_qam",
    "build_pam",
    "entropy",
    "maxwell_boltzmann_probs",
    "solve_maxwell_boltzmann",
    "shape_maxwell_boltzmann",
    "scale_snr",
    "snr_db_from_sigma2",
]

_PROB_TOL = 1e-12

# Shaping exponent search window and stopping rule.
_MB_LAMBDA_MAX = 10.0
_MB_MAX_ITER = 200
_MB_ENTROPY_TOL = 1e-9


def _gray(n: int) -> int:
    return n ^ (n >> 1)


def _gray_decode(g: int) -> int:
    b = 0
    while g:
        b ^= g
        g >>= 1
    return b


def _bits_of(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - k)) & 1 for k in range(width)], dtype=np.uint8)


@dataclass(frozen=True)
class Constellation:
    """An indexed set of points with bit labels and symbol probabilities.

    points : (M, D) float64, pairwise distinct rows
    labels : (M, m) uint8 bit rows, pairwise distinct, m = log2(M)
    probs  : (M,) float64, nonnegative, summing to 1
    """

    points: np.ndarray
    labels: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        points = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        labels = np.ascontiguousarray(np.asarray(self.labels, dtype=np.uint8))
        probs = np.ascontiguousarray(np.asarray(self.probs, dtype=np.float64))
        if points.ndim != 2:
            raise UnsupportedConstellationError("points must be a (M, D) array")
        M, D = points.shape
        if M < 2 or M & (M - 1):
            raise UnsupportedConstellationError(f"M must be a power of two >= 2, got {M}")
        m = M.bit_length() - 1
        if labels.shape != (M, m):
            raise UnsupportedConstellationError(
                f"labels must have shape ({M}, {m}), got {labels.shape}"
            )
        if probs.shape != (M,):
            raise UnsupportedConstellationError(f"probs must have shape ({M},)")
        if not np.all(np.isfinite(points)):
            raise UnsupportedConstellationError("points must be finite")
        if np.unique(points, axis=0).shape[0] != M:
            raise UnsupportedConstellationError("points must be pairwise distinct")
        if labels.max(initial=0) > 1:
            raise UnsupportedConstellationError("labels must be 0/1 valued")
        if np.unique(labels, axis=0).shape[0] != M:
            raise UnsupportedConstellationError("labels must be pairwise distinct")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise UnsupportedConstellationError("probs must be finite and nonnegative")
        if abs(probs.sum() - 1.0) > _PROB_TOL:
            raise UnsupportedConstellationError(
                f"probs must sum to 1 within {_PROB_TOL}, got {probs.sum()!r}"
            )
        for arr in (points, labels, probs):
            arr.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", probs)

    @property
    def M(self) -> int:
        return self.points.shape[0]

    @property
    def D(self) -> int:
        return self.points.shape[1]

    @property
    def m(self) -> int:
        return self.labels.shape[1]

    @property
    def entropy_bits(self) -> float:
        """Source entropy H_s of the symbol distribution, in bits."""
        return entropy(self.probs)

    def label_strings(self) -> list[str]:
        return ["".join(str(int(b)) for b in row) for row in self.labels]

    def energy_per_dim(self) -> float:
        """Average symbol energy per real dimension, sum_j p_j ||s_j||^2 / D."""
        return float(self.probs @ np.sum(self.points**2, axis=1) / self.D)

    def is_uniform(self) -> bool:
        return bool(np.all(np.abs(self.probs - 1.0 / self.M) <= _PROB_TOL))

    def with_probs(self, probs) -> "Constellation":
        return replace(self, probs=np.asarray(probs, dtype=np.float64))


_SQUARE_QAM_SIZES = (4, 16, 64, 256, 1024)


def build_square_qam(M: int, probs=None) -> Constellation:
    """Gray-labeled square QAM on odd-integer coordinates, uniform by default.

    Supported sizes: 4, 16, 64, 256, 1024. Pass probs to attach a
    nonuniform symbol distribution (see shape_maxwell_boltzmann).
    """
    if M not in _SQUARE_QAM_SIZES:
        raise UnsupportedConstellationError(
            f"square QAM supports M in {_SQUARE_QAM_SIZES}, got {M}"
        )
    m = M.bit_length() - 1
    half = m // 2
    K = 1 << half
    points = np.empty((M, 2), dtype=np.float64)
    labels = np.empty((M, m), dtype=np.uint8)
    for i1 in range(1, M + 1):
        g = (M - 1) ^ _gray(i1 - 1)  # label carried by index i1
        hi = g >> half               # first half of bits: vertical axis
        lo = g & (K - 1)             # second half: horizontal axis
        t2 = _gray_decode(hi)
        t1 = _gray_decode(lo)
        points[i1 - 1, 0] = 2 * t1 - (K - 1)
        points[i1 - 1, 1] = 2 * t2 - (K - 1)
        labels[i1 - 1] = _bits_of(g, m)
    if probs is None:
        probs = np.full(M, 1.0 / M)
    return Constellation(points, labels, probs)


def build_pam(M: int) -> Constellation:
    """Gray-labeled M-PAM on odd-integer amplitudes, uniform, ascending order."""
    if M < 2 or M & (M - 1):
        raise UnsupportedConstellationError(f"PAM size must be a power of two >= 2, got {M}")
    m = M.bit_length() - 1
    points = (2 * np.arange(M) - (M - 1)).astype(np.float64).reshape(M, 1)
    labels = np.empty((M, m), dtype=np.uint8)
    for t in range(M):
        labels[t] = _bits_of(_gray(M - 1 - t), m)
    return Constellation(points, labels, np.full(M, 1.0 / M))


def entropy(probs) -> float:
    """Entropy of a probability vector in bits. Zero entries contribute zero."""
    p = np.asarray(probs, dtype=np.float64)
    if np.any(p < 0):
        raise OutOfDomainError("probabilities must be nonnegative")
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def maxwell_boltzmann_probs(points: np.ndarray, lam: float) -> np.ndarray:
    """p_j proportional to exp(-lam * ||s_j||^2), computed in the log domain."""
    energy = np.sum(np.asarray(points, dtype=np.float64) ** 2, axis=1)
    logw = -lam * energy
    logw -= logw.max()
    p = np.exp(logw)
    return p / p.sum()


def _mb_entropy(energy: np.ndarray, lam: float) -> float:
    # H = (lam * sum(p E) + log Z) / ln 2 avoids p*log(p) underflow.
    logw = -lam * energy
    mx = logw.max()
    z = np.exp(logw - mx).sum()
    p = np.exp(logw - mx) / z
    log_z = mx + math.log(z)
    return (lam * float(p @ energy) + log_z) / math.log(2.0)


@dataclass(frozen=True)
class ShapingSpec:
    """Resolved shaping family: 'uniform' or 'maxwell-boltzmann' with exponent lam."""

    family: str
    target_entropy: float
    lam: float = 0.0

    def __post_init__(self):
        if self.family not in ("uniform", "maxwell-boltzmann"):
            raise UnsupportedInputError(f"unknown shaping family {self.family!r}")


def solve_maxwell_boltzmann(points: np.ndarray, target_entropy: float) -> ShapingSpec:
    """Find lam >= 0 with entropy(p(lam)) = target_entropy by bisection.

    The entropy of the Maxwell-Boltzmann family is nonincreasing in lam,
    from m at lam=0 down to the log-cardinality of the minimum-energy
    shell. Search window [0, 10], at most 200 iterations, entropy matched
    to 1e-9 bit.
    """
    pts = np.asarray(points, dtype=np.float64)
    M = pts.shape[0]
    m = math.log2(M)
    if not (0.0 < target_entropy <= m + _MB_ENTROPY_TOL):
        raise InfeasibleShapingError(
            f"target entropy must lie in (0, {m}], got {target_entropy}"
        )
    energy = np.sum(pts**2, axis=1)
    if target_entropy >= m - _MB_ENTROPY_TOL:
        return ShapingSpec("maxwell-boltzmann", target_entropy, 0.0)
    if energy.max() - energy.min() <= 1e-12:
        raise InfeasibleShapingError(
            "all points have equal energy, so shaping cannot change the "
            f"distribution; only target entropy {m} is reachable"
        )
    if _mb_entropy(energy, _MB_LAMBDA_MAX) > target_entropy + _MB_ENTROPY_TOL:
        raise InfeasibleShapingError(
            f"target entropy {target_entropy} unreachable with exponent <= {_MB_LAMBDA_MAX}"
        )
    lo, hi = 0.0, _MB_LAMBDA_MAX
    lam = hi
    for _ in range(_MB_MAX_ITER):
        lam = 0.5 * (lo + hi)
        h = _mb_entropy(energy, lam)
        if abs(h - target_entropy) <= 1e-12:
            break
        if h > target_entropy:
            lo = lam
        else:
            hi = lam
    if abs(_mb_entropy(energy, lam) - target_entropy) > _MB_ENTROPY_TOL:
        raise InfeasibleShapingError(
            f"bisection did not reach entropy {target_entropy} within tolerance"
        )
    return ShapingSpec("maxwell-boltzmann", target_entropy, lam)


def shape_maxwell_boltzmann(constellation: Constellation, target_entropy: float) -> Constellation:
    """Return the constellation with Maxwell-Boltzmann probabilities at the target entropy."""
    spec = solve_maxwell_boltzmann(constellation.points, target_entropy)
    return constellation.with_probs(maxwell_boltzmann_probs(constellation.points, spec.lam))


def scale_snr(constellation: Constellation, snr_db: float) -> float:
    """Per-dimension noise variance sigma_z^2 that realizes the given SNR in dB.

    SNR is defined against the average symbol energy per real dimension,
    so sigma_z^2 = (sum_j p_j ||s_j||^2 / D) / 10^(snr_db/10).
    """
    if not math.isfinite(snr_db):
        raise OutOfDomainError("snr_db must be finite")
    mean = constellation.probs @ constellation.points
    es = constellation.energy_per_dim()
    if np.max(np.abs(mean)) > 1e-9 * math.sqrt(es):
        raise UnsupportedInputError("SNR scaling expects a zero-mean constellation")
    return es / 10.0 ** (snr_db / 10.0)


def snr_db_from_sigma2(constellation: Constellation, sigma_z2: float) -> float:
    """Inverse of scale_snr."""
    if sigma_z2 <= 0:
        raise OutOfDomainError("sigma_z2 must be positive")
    return 10.0 * math.log10(constellation.energy_per_dim() / sigma_z2)
