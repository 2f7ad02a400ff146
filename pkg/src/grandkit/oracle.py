"""Brute-force references for decoder equivalence testing.

These deliberately share no machinery with the tree decoders beyond
LinearCode itself: codeword sweeps are plain numpy enumeration, and the
sorted-pattern reference enumerates all 2^n bit vectors directly.
"""

from __future__ import annotations

import numpy as np

from . import bitvec
from .channel import ReliabilityProfile
from .linear_code import LinearCode

_codebook_cache: dict[int, np.ndarray] = {}

MAX_SWEEP_K = 22


def codebook(code: LinearCode) -> np.ndarray:
    """All 2^k codewords as a uint8 matrix (cached per code object)."""
    if code.k > MAX_SWEEP_K:
        raise ValueError(f"code too large for exhaustive sweep (k={code.k})")
    key = id(code)
    cb = _codebook_cache.get(key)
    if cb is None:
        k = code.k
        msgs = ((np.arange(1 << k, dtype=np.uint32)[:, None]
                 >> np.arange(k, dtype=np.uint32)) & 1).astype(np.uint8)
        cb = (msgs @ code.generator) % 2
        cb = cb.astype(np.uint8)
        _codebook_cache[key] = cb
    return cb


def _rank_key(bits_vec: np.ndarray, ranking: np.ndarray) -> int:
    key = 0
    n = len(ranking)
    for j, pos in enumerate(ranking):
        if bits_vec[pos]:
            key |= 1 << (n - 1 - j)
    return key


def ml_decode_bruteforce(profile: ReliabilityProfile, code: LinearCode,
                         crosscheck: bool = False) -> tuple[np.ndarray, float]:
    """ML codeword by exhaustive sweep: minimize the flipped-reliability sum.

    Ties go to the pattern that reads lexicographically smaller at the
    ranked positions, matching the decoders' shared tie rule.  With
    crosscheck=True the posterior-likelihood formulation is evaluated
    independently and must agree.
    """
    cb = codebook(code)
    flips = cb != profile.hard[None, :]
    scores = flips @ profile.ell
    zmin = scores.min()
    cand = np.flatnonzero(scores <= zmin + 1e-12)
    if len(cand) == 1:
        best = cand[0]
    else:
        best = min(cand, key=lambda i: _rank_key(flips[i], profile.ranking))
    zeta_star = float(profile.ell[flips[best]].sum())

    if crosscheck:
        # Posterior product route: P(w_i|y_i) is 1/(1+e^-ell) when w_i
        # matches the hard decision and 1/(1+e^ell) otherwise.
        agree_ll = -np.logaddexp(0.0, -profile.ell)
        flip_ll = -np.logaddexp(0.0, profile.ell)
        ll = np.where(flips, flip_ll[None, :], agree_ll[None, :]).sum(axis=1)
        best_ll = int(np.argmax(ll))
        z_ll = float(profile.ell[flips[best_ll]].sum())
        if abs(z_ll - zeta_star) > 1e-9:
            raise AssertionError("likelihood and soft-weight oracles disagree")
    return cb[best].copy(), zeta_star


def ml_zeta_batch(code: LinearCode, hards: np.ndarray, ells: np.ndarray,
                  block: int = 1 << 18) -> np.ndarray:
    """Soft weights of the ML codewords for many trials at once.

    hards: (m, n) uint8, ells: (m, n) float.  Scores are accumulated in
    float32 blocks for speed; callers needing exact ties re-verify the
    winner in float64 (see tests).
    """
    cb = codebook(code)
    m, n = hards.shape
    # score(w) = const + w . g with g_i = ell_i * (1 - 2 h_i)
    g = (ells * (1.0 - 2.0 * hards)).astype(np.float32).T      # (n, m)
    const = (ells * hards).sum(axis=1).astype(np.float64)      # (m,)
    best = np.full(m, np.inf, dtype=np.float32)
    for lo in range(0, cb.shape[0], block):
        chunk = cb[lo:lo + block].astype(np.float32)
        scores = chunk @ g                                     # (b, m)
        np.minimum(best, scores.min(axis=0), out=best)
    return const + best.astype(np.float64)


def nearest_codeword(y: np.ndarray, code: LinearCode) -> np.ndarray:
    """Euclidean-nearest codeword for BPSK mapping (0 -> +1, 1 -> -1)."""
    cb = codebook(code)
    x = 1.0 - 2.0 * cb.astype(np.float64)
    d2 = ((x - y[None, :]) ** 2).sum(axis=1)
    return cb[int(np.argmin(d2))].copy()


def enumerate_all_eps_sorted(profile: ReliabilityProfile) -> list[tuple[int, float]]:
    """All 2^n patterns as (bits, soft weight), sorted by the shared order."""
    n = profile.n
    if n > 14:
        raise ValueError(f"n={n} too large for exhaustive enumeration")
    total = 1 << n
    pats = ((np.arange(total, dtype=np.uint32)[:, None]
             >> np.arange(n, dtype=np.uint32)) & 1).astype(np.uint8)
    zetas = pats @ profile.ell
    # tie key: bits read in ranking order, first rank most significant
    shifts = np.zeros(n, dtype=np.int64)
    shifts[profile.ranking] = n - 1 - np.arange(n)
    keys = (pats.astype(np.int64) << shifts[None, :]).sum(axis=1)
    order = np.lexsort((keys, zetas))
    return [(int(i), float(zetas[i])) for i in order]
