"""Symbol traces and memoryless channel simulators.

Randomness is drawn from independent substreams of one seed (numpy
SeedSequence spawn keys): stream 0 feeds index draws, stream 1 additive
noise, stream 2 phase noise. Because the streams are independent, the
rotated channel with sigma_theta2 = 0 consumes the phase stream without
disturbing the noise stream and reproduces apply_awgn bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .constellation import Constellation
from .errors import ConfigurationError, DimensionMismatchError, OutOfDomainError

__all__ = [
    "Trace",
    "ChannelSpec",
    "draw_indices",
    "apply_awgn",
    "apply_pn_awgn",
    "simulate",
]

_STREAM_INDEX = 0
_STREAM_NOISE = 1
_STREAM_PHASE = 2


def _stream_rng(seed: int, stream: int) -> np.random.Generator:
    if seed < 0:
        raise ConfigurationError(f"seed must be a nonnegative integer, got {seed}")
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(stream,)))


@dataclass(frozen=True)
class Trace:
    """Transmitted indices and matching received vectors.

    tx_indices : (N,) int64, 1-based symbol indices into the constellation
    rx         : (N, D) float64 received vectors
    meta       : provenance strings (channel kind, seed, parameters)
    """

    constellation: Constellation
    tx_indices: np.ndarray
    rx: np.ndarray
    meta: Mapping[str, str] = None

    def __post_init__(self):
        idx = np.ascontiguousarray(np.asarray(self.tx_indices, dtype=np.int64))
        rx = np.ascontiguousarray(np.asarray(self.rx, dtype=np.float64))
        c = self.constellation
        if idx.ndim != 1 or idx.size < 1:
            raise DimensionMismatchError("tx_indices must be a nonempty 1-D array")
        if rx.shape != (idx.size, c.D):
            raise DimensionMismatchError(
                f"rx must have shape ({idx.size}, {c.D}), got {rx.shape}"
            )
        if idx.min() < 1 or idx.max() > c.M:
            raise DimensionMismatchError(f"tx indices must lie in [1, {c.M}]")
        if not np.all(np.isfinite(rx)):
            raise DimensionMismatchError("rx must be finite")
        idx.setflags(write=False)
        rx.setflags(write=False)
        meta = {str(k): str(v) for k, v in (self.meta or {}).items()}
        object.__setattr__(self, "tx_indices", idx)
        object.__setattr__(self, "rx", rx)
        object.__setattr__(self, "meta", MappingProxyType(meta))

    @property
    def N(self) -> int:
        return self.tx_indices.size

    def tx_points(self) -> np.ndarray:
        return self.constellation.points[self.tx_indices - 1]


@dataclass(frozen=True)
class ChannelSpec:
    """Channel kind plus parameters, as assembled by the CLI."""

    kind: str  # "awgn" | "pn-awgn"
    sigma_z2: float
    sigma_theta2: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("awgn", "pn-awgn"):
            raise ConfigurationError(f"unknown channel kind {self.kind!r}")
        if not (math.isfinite(self.sigma_z2) and self.sigma_z2 > 0):
            raise ConfigurationError("sigma_z2 must be positive and finite")
        if not (math.isfinite(self.sigma_theta2) and self.sigma_theta2 >= 0):
            raise ConfigurationError("sigma_theta2 must be nonnegative and finite")
        if self.seed < 0:
            raise ConfigurationError("seed must be nonnegative")


def draw_indices(constellation: Constellation, n: int, seed: int) -> np.ndarray:
    """Draw n 1-based symbol indices i.i.d. from the constellation probabilities."""
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    rng = _stream_rng(seed, _STREAM_INDEX)
    idx = rng.choice(constellation.M, size=n, p=constellation.probs)
    return idx.astype(np.int64) + 1


def _base_meta(kind: str, sigma_z2: float, seed: int, n: int) -> dict:
    return {
        "channel": kind,
        "sigma_z2": f"{sigma_z2:.17g}",
        "seed": str(seed),
        "n": str(n),
    }


def apply_awgn(
    constellation: Constellation,
    tx_indices: np.ndarray,
    sigma_z2: float,
    seed: int,
    extra_meta: Mapping[str, str] | None = None,
) -> Trace:
    """y_n = s(i_n) + z_n with z i.i.d. N(0, sigma_z2 I)."""
    if not (math.isfinite(sigma_z2) and sigma_z2 > 0):
        raise OutOfDomainError("sigma_z2 must be positive and finite")
    idx = np.asarray(tx_indices, dtype=np.int64)
    tx = constellation.points[idx - 1]
    noise = _stream_rng(seed, _STREAM_NOISE).standard_normal(tx.shape)
    rx = tx + math.sqrt(sigma_z2) * noise
    meta = _base_meta("awgn", sigma_z2, seed, idx.size)
    meta.update(extra_meta or {})
    return Trace(constellation, idx, rx, meta)


def apply_pn_awgn(
    constellation: Constellation,
    tx_indices: np.ndarray,
    sigma_theta2: float,
    sigma_z2: float,
    seed: int,
    extra_meta: Mapping[str, str] | None = None,
) -> Trace:
    """y_n = R(theta_n) s(i_n) + z_n, theta i.i.d. N(0, sigma_theta2), unwrapped.

    Requires D = 2 (R is a plane rotation). With sigma_theta2 = 0 the
    output equals apply_awgn with the same seed, bit for bit.
    """
    if constellation.D != 2:
        raise DimensionMismatchError("phase rotation needs a 2-dimensional constellation")
    if not (math.isfinite(sigma_theta2) and sigma_theta2 >= 0):
        raise OutOfDomainError("sigma_theta2 must be nonnegative and finite")
    if not (math.isfinite(sigma_z2) and sigma_z2 > 0):
        raise OutOfDomainError("sigma_z2 must be positive and finite")
    idx = np.asarray(tx_indices, dtype=np.int64)
    tx = constellation.points[idx - 1]
    theta = math.sqrt(sigma_theta2) * _stream_rng(seed, _STREAM_PHASE).standard_normal(idx.size)
    c, s = np.cos(theta), np.sin(theta)
    rotated = np.empty_like(tx)
    rotated[:, 0] = c * tx[:, 0] - s * tx[:, 1]
    rotated[:, 1] = s * tx[:, 0] + c * tx[:, 1]
    noise = _stream_rng(seed, _STREAM_NOISE).standard_normal(tx.shape)
    rx = rotated + math.sqrt(sigma_z2) * noise
    meta = _base_meta("pn-awgn", sigma_z2, seed, idx.size)
    meta["sigma_theta2"] = f"{sigma_theta2:.17g}"
    meta.update(extra_meta or {})
    return Trace(constellation, idx, rx, meta)


def simulate(
    constellation: Constellation,
    spec: ChannelSpec,
    n: int,
    extra_meta: Mapping[str, str] | None = None,
) -> Trace:
    """Draw indices and push them through the channel described by spec."""
    idx = draw_indices(constellation, n, spec.seed)
    if spec.kind == "awgn":
        return apply_awgn(constellation, idx, spec.sigma_z2, spec.seed, extra_meta)
    return apply_pn_awgn(
        constellation, idx, spec.sigma_theta2, spec.sigma_z2, spec.seed, extra_meta
    )
