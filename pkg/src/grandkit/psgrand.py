"""Parallel SGRAND: batched best-first search over the EP tree.

Each round extracts the n_k smallest-soft-weight frontier nodes, tests
the whole batch at once, and inserts the surviving children.  Batching
relaxes the strict serial order, so after the first valid pattern the
search keeps going until the frontier minimum exceeds the best valid
soft weight, which certifies maximum-likelihood optimality.

Accelerations (all individually toggleable):
  pruning    : drop the remaining frontier once a batch holds any valid
               pattern, and never insert children above the incumbent.
  recursion  : child soft weights and syndromes derived from the parent
               in O(1) instead of recomputed from scratch.
  early term : minimum-distance sufficient condition that certifies the
               incumbent without draining the frontier.

The frontier is a structure-of-arrays pool (float soft weights, two
64-bit lanes of pattern bits, packed syndromes, depths) so per-round
work runs as vectorized numpy kernels; this stands in for the hardware
concurrency the round structure is designed around.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import bitvec
from .channel import ReliabilityProfile
from .ep_tree import (ErrorPattern, depth_of_bits, rank_key_of_bits,
                      zeta_direct)
from .linear_code import LinearCode
from .sgrand import (DecodeResult, WorkCounters, EARLY_TERM,
                     FRONTIER_EXHAUSTED, ML_CERTIFIED, QUERY_LIMIT)

_LOW64 = (1 << 64) - 1


@dataclass(frozen=True)
class BatchSchedule:
    """Per-round batch sizes: constant n, or an explicit head list whose
    last value repeats.  k_max bounds the number of rounds."""

    n: int = 32
    k_max: Optional[int] = None
    per_round: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("batch size must be >= 1")
        if self.per_round is not None and any(v < 1 for v in self.per_round):
            raise ValueError("per-round batch sizes must be >= 1")

    def n_for_round(self, k: int) -> int:
        if self.per_round:
            return self.per_round[min(k - 1, len(self.per_round) - 1)]
        return self.n


@dataclass
class ResumeState:
    """Hand-off frontier from a first-stage decoder (pairwise non-ancestral
    nodes), plus the incumbent found so far.

    The frontier is either a sequence of ErrorPattern nodes or a
    (zeta, bits_lo, bits_hi, syndrome, depth) array tuple.
    """

    frontier: Union[Sequence[ErrorPattern], tuple]
    e_star: Optional[ErrorPattern] = None

    @property
    def zeta_min(self) -> float:
        return self.e_star.soft_weight if self.e_star else float("inf")


class PoolFrontier:
    """Candidate pool: a float soft-weight column plus a uint64 matrix
    holding bit lanes, syndrome, and depth.  Two arrays keep the per-round
    numpy dispatch count low."""

    _COLS = 4  # lo, hi, sy, depth

    def __init__(self):
        self.zeta = np.empty(0, dtype=np.float64)
        self.aux = np.empty((0, self._COLS), dtype=np.uint64)

    def __len__(self) -> int:
        return len(self.zeta)

    def min_zeta(self) -> float:
        return float(self.zeta.min()) if len(self.zeta) else float("inf")

    def insert(self, zeta, lo, hi, sy, depth) -> None:
        m = len(zeta)
        aux = np.empty((m, self._COLS), dtype=np.uint64)
        aux[:, 0] = lo
        aux[:, 1] = hi
        aux[:, 2] = sy
        aux[:, 3] = depth.astype(np.uint64) if depth.dtype != np.uint64 else depth
        self.zeta = np.concatenate([self.zeta, np.asarray(zeta, dtype=np.float64)])
        self.aux = np.concatenate([self.aux, aux])

    def _insert_packed(self, zeta: np.ndarray, aux: np.ndarray) -> None:
        if not len(self.zeta):
            self.zeta = zeta
            self.aux = aux
        else:
            self.zeta = np.concatenate([self.zeta, zeta])
            self.aux = np.concatenate([self.aux, aux])

    def insert_nodes(self, nodes: Sequence[ErrorPattern]) -> None:
        m = len(nodes)
        z = np.empty(m, dtype=np.float64)
        aux = np.empty((m, self._COLS), dtype=np.uint64)
        for i, e in enumerate(nodes):
            z[i] = e.soft_weight
            aux[i, 0] = e.bits & _LOW64
            aux[i, 1] = e.bits >> 64
            aux[i, 2] = e.syndrome
            aux[i, 3] = e.depth
        self._insert_packed(z, aux)

    def clear(self) -> None:
        self.__init__()

    def select_n_min(self, m: int) -> "Batch":
        """Remove and return the m smallest-soft-weight entries."""
        size = len(self.zeta)
        m = min(m, size)
        if m == 0:
            return Batch(np.empty(0), np.empty((0, self._COLS), dtype=np.uint64))
        if m >= size:
            bz, baux = self.zeta, self.aux
            self.zeta = np.empty(0, dtype=np.float64)
            self.aux = np.empty((0, self._COLS), dtype=np.uint64)
        else:
            idx = np.argpartition(self.zeta, m - 1)[:m]
            bz = self.zeta[idx]
            baux = self.aux[idx]
            keep = np.ones(size, dtype=bool)
            keep[idx] = False
            self.zeta = self.zeta[keep]
            self.aux = self.aux[keep]
        return Batch(bz, baux)

    def bits_list(self) -> list[int]:
        return [int(l) | (int(h) << 64) for l, h in
                zip(self.aux[:, 0], self.aux[:, 1])]


class Batch:
    """One round's extracted candidates."""

    __slots__ = ("zeta", "aux")

    def __init__(self, zeta: np.ndarray, aux: np.ndarray):
        self.zeta = zeta
        self.aux = aux

    def __len__(self) -> int:
        return len(self.zeta)

    @property
    def syndromes(self) -> np.ndarray:
        return self.aux[:, 2]

    @property
    def depths(self) -> np.ndarray:
        return self.aux[:, 3]

    def bits_at(self, i: int) -> int:
        return int(self.aux[i, 0]) | (int(self.aux[i, 1]) << 64)

    def bits_list(self) -> list[int]:
        return [self.bits_at(i) for i in range(len(self.zeta))]


def select_batch(pool: PoolFrontier, n_k: int):
    """Spec surface for the per-round extraction."""
    return pool.select_n_min(n_k)


_POS_MASKS: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _pos_masks(n: int) -> tuple[np.ndarray, np.ndarray]:
    masks = _POS_MASKS.get(n)
    if masks is None:
        pos = np.arange(n, dtype=np.int64)
        plo = np.where(pos < 64, np.uint64(1) << pos.astype(np.uint64),
                       np.uint64(0))
        phi = np.where(pos >= 64,
                       np.uint64(1) << (pos - 64).clip(min=0).astype(np.uint64),
                       np.uint64(0))
        masks = (plo, phi)
        _POS_MASKS[n] = masks
    return masks


class _TreeKernels:
    """Vectorized child generation for a fixed (profile, code).

    Every child field is an XOR of the parent row with a per-depth
    constant: bit lanes flip exactly the ranks that change, the syndrome
    flips the matching columns, and the depth column flips d^(d+1).  One
    table gather plus one XOR therefore produces a whole child batch.
    """

    def __init__(self, profile: ReliabilityProfile, code: LinearCode):
        n = profile.n
        if n > 128:
            raise ValueError("pattern length above 128 not supported")
        if code.n - code.k > 64:
            raise ValueError("syndrome wider than 64 bits not supported")
        self.n = n
        self.nk = code.n - code.k
        r = np.asarray(profile.ranking, dtype=np.int64)
        self.ell_rank = profile.ell_ranked
        self.ell_pos = profile.ell
        plo_all, phi_all = _pos_masks(n)
        plo = plo_all[r]
        phi = phi_all[r]
        hcol = code.h_cols_np[r]
        d = np.arange(n, dtype=np.uint64)
        dstep = d ^ (d + np.uint64(1))
        XR = np.empty((n, 4), dtype=np.uint64)
        XR[:, 0] = plo
        XR[:, 1] = phi
        XR[:, 2] = hcol
        XR[:, 3] = dstep
        XL = XR.copy()
        XL[1:, 0] ^= plo[:-1]
        XL[1:, 1] ^= phi[:-1]
        XL[1:, 2] ^= hcol[:-1]
        F = np.empty((n, 2), dtype=np.float64)
        F[:, 0] = self.ell_rank
        F[0, 1] = 0.0
        F[1:, 1] = self.ell_rank[1:] - self.ell_rank[:-1]
        self.XR = XR
        self.XL = XL
        self.F = F

    def children(self, batch: Batch, counters: WorkCounters,
                 recursive: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """All children of the batch as (zeta, aux); shift-top children
        first, then add-next children (the root only spawns the latter)."""
        zg = batch.zeta
        auxg = batch.aux
        dg = auxg[:, 3]
        m = len(zg)
        if m and int(dg.max()) >= self.n:
            keep = dg < np.uint64(self.n)
            zg, auxg = zg[keep], auxg[keep]
            dg = auxg[:, 3]
            m = len(zg)
        Fg = self.F[dg]
        r_aux = auxg ^ self.XR[dg]
        r_z = zg + Fg[:, 0]

        if m and int(dg.min()) >= 1:
            l_aux = auxg ^ self.XL[dg]
            l_z = zg + Fg[:, 1]
            ml = m
        else:
            hl = dg >= np.uint64(1)
            auxl = auxg[hl]
            l_aux = auxl ^ self.XL[auxl[:, 3]]
            l_z = zg[hl] + Fg[hl, 1]
            ml = len(l_aux)

        if recursive:
            counters.zeta_adds += 2 * ml + m
            counters.parity_bit_ops += (2 * ml + m) * self.nk
            return _cat(l_z, r_z), _cat(l_aux, r_aux)
        # recompute soft weights from scratch; syndromes stay uncached and
        # get recomputed at test time
        z = _cat(l_z, r_z)
        aux = _cat(l_aux, r_aux)
        total = len(z)
        if total:
            mat = _unpack_matrix(aux[:, 0], aux[:, 1], self.n)
            z = mat @ self.ell_pos
            counters.zeta_adds += total * self.n
            aux[:, 2] = 0
        return z, aux


def _cat(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if not len(a):
        return b
    if not len(b):
        return a
    return np.concatenate([a, b])


def _unpack_matrix(lo: np.ndarray, hi: np.ndarray, n: int) -> np.ndarray:
    """(m, n) uint8 bit matrix from two uint64 lanes."""
    m = len(lo)
    raw = np.empty((m, 16), dtype=np.uint8)
    raw[:, :8] = lo.astype("<u8").view(np.uint8).reshape(m, 8)
    raw[:, 8:] = hi.astype("<u8").view(np.uint8).reshape(m, 8)
    return np.unpackbits(raw, axis=1, bitorder="little")[:, :n]


def batch_syndrome(code: LinearCode, batch_bits: Sequence[int]) -> list[int]:
    """Syndromes of many packed vectors via one GF(2) matrix product."""
    if len(batch_bits) == 0:
        raise ValueError("batch must be nonempty")
    lo = np.array([b & _LOW64 for b in batch_bits], dtype=np.uint64)
    hi = np.array([b >> 64 for b in batch_bits], dtype=np.uint64)
    mat = _unpack_matrix(lo, hi, code.n)
    syn = (mat @ code.parity_check.T) % 2
    shifts = np.arange(code.n - code.k, dtype=np.int64)
    packed = (syn.astype(np.int64) << shifts[None, :]).sum(axis=1)
    return [int(s) for s in packed]


def early_termination_check(ep: ErrorPattern, profile: ReliabilityProfile,
                            d_min: int) -> bool:
    """Minimum-distance certificate for a valid pattern.

    True when the pattern's soft weight is at most the sum of the
    (d_min - flips) smallest reliabilities over its unflipped positions;
    any other valid pattern must then weigh at least as much.
    """
    return _early_term_bits(ep.bits, ep.soft_weight, profile, d_min)


def _early_term_bits(bits: int, zeta: float, profile: ReliabilityProfile,
                     d_min: int) -> bool:
    m = d_min - bits.bit_count()
    if m <= 0:
        return zeta <= 0.0
    bound = 0.0
    cnt = 0
    ranking = profile.ranking
    ell_ranked = profile.ell_ranked
    for j in range(profile.n):
        if not (bits >> int(ranking[j])) & 1:
            bound += ell_ranked[j]
            cnt += 1
            if cnt == m:
                break
    return zeta <= bound


def prune_insert(pool: PoolFrontier, children, zeta_min: float) -> int:
    """Insert children whose soft weight does not exceed the incumbent."""
    z, aux = children
    if zeta_min != float("inf"):
        keep = z <= zeta_min
        z, aux = z[keep], aux[keep]
    if len(z):
        pool._insert_packed(z, aux)
    return len(z)


def psgrand_decode(profile: ReliabilityProfile, code: LinearCode,
                   schedule: BatchSchedule = BatchSchedule(),
                   prune: bool = True, early_term: bool = True,
                   recursive: bool = True,
                   resume: Optional[ResumeState] = None,
                   query_limit: Optional[int] = None,
                   tester: Callable[[int], bool] | None = None,
                   want_trace: bool = False,
                   collect_tested: bool = False) -> DecodeResult:
    """Batched ML decoding with pruning, recursion, and early termination.

    With no round or query bound the result equals serial SGRAND's under
    the shared tie rule.  A resume state replaces the root frontier and
    incumbent (hand-off from a pattern-set first stage).
    """
    kern = _TreeKernels(profile, code)
    counters = WorkCounters()
    hard = profile.hard_bits
    target = np.uint64(code.syndrome_int(hard))
    n = code.n
    nk = code.n - code.k

    _inv: list = []

    def rank_of() -> list[int]:
        if not _inv:
            inv = np.empty(n, dtype=np.int64)
            inv[profile.ranking] = np.arange(n)
            _inv.append(inv.tolist())
        return _inv[0]

    pool = PoolFrontier()
    best_bits: Optional[int] = None
    best_zeta = float("inf")
    best_key = 0
    queries = 0
    k = 0
    trace = [] if want_trace else None
    tested = [] if collect_tested else None
    k_max = schedule.k_max if schedule.k_max is not None else (1 << 62)
    budget = query_limit if query_limit is not None else (1 << 62)

    def result(termination: str, tau: float) -> DecodeResult:
        if best_bits is None:
            return DecodeResult(None, None, None, queries, k, termination,
                                tau_final=tau, counters=counters, trace=trace,
                                tested_bits=tested)
        # with the default tester a stored incumbent matched the target
        # syndrome by construction
        syn = int(target) if tester is None else code.syndrome_int(best_bits)
        ep = ErrorPattern(best_bits, best_zeta,
                          depth_of_bits(best_bits, rank_of()), syn, best_key)
        word = bitvec.unpack(hard ^ best_bits, n)
        return DecodeResult(word, ep, best_zeta, queries, k, termination,
                            tau_final=tau, counters=counters, trace=trace,
                            tested_bits=tested)

    if resume is None:
        pool.insert_nodes([ErrorPattern(0, 0.0, 0, 0, 0)])
    else:
        if isinstance(resume.frontier, tuple):
            z, flo, fhi, fsy, fd = resume.frontier
            if prune and resume.e_star is not None:
                # frontier invariant: nothing above the incumbent survives
                keep = z <= resume.e_star.soft_weight
                z, flo, fhi, fsy, fd = (z[keep], flo[keep], fhi[keep],
                                        fsy[keep], fd[keep])
            if len(z):
                pool.insert(np.asarray(z, dtype=np.float64),
                            np.asarray(flo, dtype=np.uint64),
                            np.asarray(fhi, dtype=np.uint64),
                            np.asarray(fsy, dtype=np.uint64),
                            np.asarray(fd, dtype=np.int64))
        else:
            members = list(resume.frontier)
            if prune and resume.e_star is not None:
                zmin = resume.e_star.soft_weight
                members = [e for e in members if e.soft_weight <= zmin]
            pool.insert_nodes(members)
        if resume.e_star is not None:
            best_bits = resume.e_star.bits
            best_zeta = resume.e_star.soft_weight
            best_key = resume.e_star.rank_key
            # round-0 checks on the inherited incumbent
            if early_term and _early_term_bits(best_bits, best_zeta, profile,
                                               code.d_min):
                return result(EARLY_TERM, pool.min_zeta())
            tau0 = pool.min_zeta()
            if tau0 > best_zeta:
                return result(ML_CERTIFIED, tau0)
        if len(pool) == 0:
            return result(FRONTIER_EXHAUSTED, float("inf"))

    while k < k_max:
        if len(pool) == 0:
            if best_bits is not None:
                return result(ML_CERTIFIED, float("inf"))
            return result(FRONTIER_EXHAUSTED, float("inf"))
        if queries >= budget:
            return result(QUERY_LIMIT, pool.min_zeta())
        k += 1
        n_k = min(schedule.n_for_round(k), budget - queries)
        batch = select_batch(pool, n_k)
        m = len(batch)
        queries += m
        if tested is not None:
            tested.extend(batch.bits_list())

        # batch validity test
        if tester is None:
            if recursive:
                counters.parity_bit_ops += m * nk
                hits = batch.syndromes == target
            else:
                syns = batch_syndrome(code, batch.bits_list())
                counters.parity_bit_ops += m * n * nk
                hits = np.array(syns, dtype=np.uint64) == target
        else:
            hits = np.array([tester(b) for b in batch.bits_list()], dtype=bool)

        if hits.any():
            valid_idx = np.flatnonzero(hits)
            # batch winner under the shared (soft weight, rank key) order;
            # rank keys are only materialized when soft weights tie
            if len(valid_idx) == 1:
                cand = int(valid_idx[0])
            else:
                cand = min(
                    valid_idx,
                    key=lambda i: (batch.zeta[i],
                                   rank_key_of_bits(batch.bits_at(i),
                                                    rank_of(), n)),
                )
            cz = float(batch.zeta[cand])
            better = cz < best_zeta
            if not better and cz == best_zeta and best_bits is not None:
                better = rank_key_of_bits(batch.bits_at(cand), rank_of(),
                                          n) < best_key
            if better:
                best_bits = batch.bits_at(cand)
                best_zeta = cz
                best_key = rank_key_of_bits(best_bits, rank_of(), n)
                if early_term and _early_term_bits(best_bits, best_zeta,
                                                   profile, code.d_min):
                    return result(EARLY_TERM, pool.min_zeta())
            if prune:
                pool.clear()

        children = kern.children(batch, counters, recursive=recursive)
        prune_insert(pool, children, best_zeta if prune else float("inf"))

        tau_k = pool.min_zeta()
        if trace is not None:
            trace.append((k, tau_k, best_zeta, queries))
        if tau_k > best_zeta:
            return result(ML_CERTIFIED, tau_k)
    return result(QUERY_LIMIT, pool.min_zeta())
