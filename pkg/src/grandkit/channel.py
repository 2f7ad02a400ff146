"""BPSK-over-AWGN simulation and reliability extraction.

Everything a decoder consumes comes out of here: per-position
reliabilities (|LLR|), the hard decision, and the ranking permutation
that sorts reliabilities in non-decreasing order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bitvec


@dataclass(frozen=True)
class ChannelConfig:
    ebno_db: float
    rate: float
    seed: int = 0

    @property
    def sigma(self) -> float:
        # Eb/N0 convention for unit-energy BPSK: sigma^2 = 1/(2 R 10^(EbN0/10))
        return math.sqrt(1.0 / (2.0 * self.rate * 10.0 ** (self.ebno_db / 10.0)))


@dataclass(frozen=True, eq=False)
class ReliabilityProfile:
    """Reliabilities, hard decision, and the reliability ranking.

    ranking[j] is the position (0-based) with the j-th smallest
    reliability; ties keep the lower position first so every consumer
    sees the same deterministic order.
    """

    ell: np.ndarray                 # nonnegative float64, length n
    ranking: np.ndarray             # int64 permutation of 0..n-1
    hard: np.ndarray                # uint8 hard decisions
    hard_bits: int = field(init=False)
    ell_ranked: np.ndarray = field(init=False)

    def __post_init__(self):
        n = len(self.ell)
        if np.any(self.ell < 0):
            raise ValueError("reliabilities must be nonnegative")
        if sorted(self.ranking.tolist()) != list(range(n)):
            raise ValueError("ranking is not a permutation")
        er = self.ell[self.ranking]
        if np.any(np.diff(er) < 0):
            raise ValueError("ranking does not sort reliabilities")
        object.__setattr__(self, "hard_bits", bitvec.pack(self.hard))
        object.__setattr__(self, "ell_ranked", er)

    @property
    def n(self) -> int:
        return len(self.ell)


def transmit(w: np.ndarray, cfg: ChannelConfig, rng: np.random.Generator) -> np.ndarray:
    """Antipodal mapping (0 -> +1, 1 -> -1) plus white Gaussian noise."""
    w = np.asarray(w, dtype=np.uint8)
    x = 1.0 - 2.0 * w
    return x + rng.normal(0.0, cfg.sigma, size=w.shape)


def observe(y: np.ndarray, cfg: ChannelConfig) -> ReliabilityProfile:
    """LLR magnitudes, hard decisions, and the stable reliability ranking."""
    y = np.asarray(y, dtype=np.float64)
    ell = np.abs(2.0 * y / (cfg.sigma ** 2))
    hard = (y < 0).astype(np.uint8)
    ranking = np.argsort(ell, kind="stable")
    return ReliabilityProfile(ell=ell, ranking=ranking, hard=hard)


def profile_from_reliabilities(ell, hard=None) -> ReliabilityProfile:
    """Build a profile directly from reliability values (mainly for tests)."""
    ell = np.asarray(ell, dtype=np.float64)
    if hard is None:
        hard = np.zeros(len(ell), dtype=np.uint8)
    return ReliabilityProfile(
        ell=ell,
        ranking=np.argsort(ell, kind="stable"),
        hard=np.asarray(hard, dtype=np.uint8),
    )
