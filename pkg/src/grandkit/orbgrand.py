"""ORBGRAND: precomputed rank-domain pattern sets, permuted at runtime.

A pattern set lists binary vectors over rank positions in non-decreasing
gamma weight (gamma non-decreasing, positive).  At decode time each
pattern is mapped through the reliability ranking and tested in order.
gamma_i = i gives the classic logistic-weight schedule.

Generation walks the rank-domain EP tree best-first on gamma weight,
breaking weight ties in favor of the most recently inserted node; the
resulting order is recorded in the file header since equal-weight order
is a free choice that shifts average query counts slightly.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import bitvec
from .channel import ReliabilityProfile
from .ep_tree import EPTree, ErrorPattern, zeta_direct
from .linear_code import LinearCode
from .sgrand import (DecodeResult, QUERY_LIMIT, VALID_FOUND, WorkCounters)

FORMAT_TAG = "ORBSET"
FORMAT_VERSION = "v1"
TIE_ORDER = "tree-lifo"


class PatternSetError(ValueError):
    pass


@dataclass(eq=False)
class AbstractPatternSet:
    """Ordered rank-domain patterns, stored as sorted 0-based index tuples.

    child_left/child_right map a pattern index to the set index of its
    rank-domain tree children (-1 when the child is not in the set);
    they come for free from the generator and back the vectorized
    envelope construction.
    """

    n: int
    T: int
    gamma_desc: str
    patterns: list[tuple[int, ...]]
    child_left: Optional[np.ndarray] = field(default=None, repr=False)
    child_right: Optional[np.ndarray] = field(default=None, repr=False)
    _flat: Optional[np.ndarray] = field(default=None, repr=False)
    _starts: Optional[np.ndarray] = field(default=None, repr=False)
    _tops: Optional[np.ndarray] = field(default=None, repr=False)
    _index: Optional[dict] = field(default=None, repr=False)

    def gamma(self) -> Optional[np.ndarray]:
        return gamma_from_descriptor(self.gamma_desc, self.n)

    def describe(self) -> str:
        return f"orbset(n={self.n},T={self.T},gamma={self.gamma_desc})"

    def flat_supports(self) -> tuple[np.ndarray, np.ndarray]:
        """Supports flattened for vectorized reduction.

        Each pattern contributes a leading sentinel index n (mapped to a
        zero entry by consumers) so empty supports reduce cleanly.
        """
        if self._flat is None:
            starts = np.empty(self.T, dtype=np.int64)
            flat = []
            pos = 0
            for i, s in enumerate(self.patterns):
                starts[i] = pos
                flat.append(self.n)
                flat.extend(s)
                pos += 1 + len(s)
            self._flat = np.array(flat, dtype=np.int64)
            self._starts = starts
        return self._flat, self._starts

    def tops(self) -> np.ndarray:
        """Highest support index per pattern (-1 for the all-zero pattern)."""
        if self._tops is None:
            self._tops = np.array(
                [s[-1] if s else -1 for s in self.patterns], dtype=np.int64)
        return self._tops

    def index_of(self) -> dict:
        """Packed rank-domain bits -> list index, built lazily."""
        if self._index is None:
            idx = {}
            for i, s in enumerate(self.patterns):
                b = 0
                for j in s:
                    b |= 1 << j
                idx[b] = i
            self._index = idx
        return self._index

    def child_tables(self) -> tuple[np.ndarray, np.ndarray]:
        """child_left/child_right, reconstructed via hashing when absent."""
        if self.child_left is None or self.child_right is None:
            index = self.index_of()
            n = self.n
            cl = np.full(self.T, -1, dtype=np.int64)
            cr = np.full(self.T, -1, dtype=np.int64)
            for i, s in enumerate(self.patterns):
                top = s[-1] if s else -1
                if top == n - 1:
                    continue
                if not s:
                    # the root's single child counts as the add-next child
                    kids = (None, (0,))
                else:
                    kids = (s[:-1] + (top + 1,), s + (top + 1,))
                for side, c in enumerate(kids):
                    if c is None:
                        continue
                    b = 0
                    for j in c:
                        b |= 1 << j
                    hit = index.get(b, -1)
                    if side == 0:
                        cl[i] = hit
                    else:
                        cr[i] = hit
            self.child_left, self.child_right = cl, cr
        return self.child_left, self.child_right


def gamma_from_descriptor(desc: str, n: int) -> Optional[np.ndarray]:
    if desc == "linear":
        return np.arange(1, n + 1, dtype=np.float64)
    if desc == "constant":
        return np.ones(n, dtype=np.float64)
    if desc.startswith("list:"):
        vals = np.array([float(x) for x in desc[5:].split(",")], dtype=np.float64)
        if len(vals) != n:
            raise PatternSetError("gamma list length does not match n")
        return vals
    return None  # external / unknown descriptor


def descriptor_for_gamma(gamma: np.ndarray) -> str:
    n = len(gamma)
    if np.array_equal(gamma, np.arange(1, n + 1)):
        return "linear"
    if np.array_equal(gamma, np.ones(n)):
        return "constant"
    return "list:" + ",".join(f"{g:g}" for g in gamma)


def generate_pattern_set(n: int, T: int, gamma) -> AbstractPatternSet:
    """First T rank-domain patterns in non-decreasing gamma weight.

    Best-first traversal of the rank-domain tree; among equal weights the
    most recently inserted node comes out first.  Parent/child links are
    recorded as the traversal discovers them.
    """
    gamma = np.asarray(gamma, dtype=np.float64)
    if len(gamma) != n:
        raise PatternSetError("gamma length must equal n")
    if np.any(gamma <= 0) or np.any(np.diff(gamma) < 0):
        raise PatternSetError("gamma must be positive and non-decreasing")
    if T > (1 << n):
        raise PatternSetError(f"T={T} exceeds 2^{n} patterns")
    out: list[tuple[int, ...]] = []
    child_tabs = [np.full(T, -1, dtype=np.int64), np.full(T, -1, dtype=np.int64)]
    seq = 0
    # heap entries: (weight, -seq, support, parent index, side)
    heap = [(0.0, 0, (), -1, 1)]
    while heap and len(out) < T:
        w, _, s, parent, side = heapq.heappop(heap)
        idx = len(out)
        out.append(s)
        if parent >= 0:
            child_tabs[side][parent] = idx
        top = s[-1] if s else -1
        if top == n - 1:
            continue
        if not s:
            children = ((float(gamma[0]), (0,), 1),)
        else:
            grow = float(gamma[top + 1])
            children = (
                (w + grow - float(gamma[top]), s[:-1] + (top + 1,), 0),  # shift top up
                (w + grow, s + (top + 1,), 1),                           # add next rank
            )
        for cw, cs, cside in children:
            seq += 1
            heapq.heappush(heap, (cw, -seq, cs, idx, cside))
    return AbstractPatternSet(n=n, T=len(out),
                              gamma_desc=descriptor_for_gamma(gamma),
                              patterns=out,
                              child_left=child_tabs[0][: len(out)],
                              child_right=child_tabs[1][: len(out)])


def permute_patterns(pattern_set: AbstractPatternSet,
                     ranking: np.ndarray) -> list[int]:
    """Concrete packed patterns: rank index j maps to position ranking[j]."""
    r = [int(p) for p in ranking]
    if sorted(r) != list(range(pattern_set.n)):
        raise PatternSetError("ranking is not a permutation of the code length")
    out = []
    for s in pattern_set.patterns:
        b = 0
        for j in s:
            b |= 1 << r[j]
        out.append(b)
    return out


@dataclass
class OrbPrefix:
    """The tested prefix of a permuted pattern set (hand-off to a resumer)."""

    pattern_set: AbstractPatternSet
    profile: ReliabilityProfile
    count: int

    def concrete_bits(self) -> list[int]:
        r = [int(p) for p in self.profile.ranking]
        out = []
        for s in self.pattern_set.patterns[: self.count]:
            b = 0
            for j in s:
                b |= 1 << r[j]
            out.append(b)
        return out


def orb_decode(profile: ReliabilityProfile, code: LinearCode,
               pattern_set: AbstractPatternSet,
               query_limit: Optional[int] = None,
               tester: Callable[[int], bool] | None = None
               ) -> tuple[DecodeResult, OrbPrefix]:
    """Test permuted patterns in order; stop at the first valid one.

    Returns the result plus the tested prefix so a refinement stage can
    resume from its envelope.  Soft weights are only computed for the
    winning pattern.
    """
    if pattern_set.n != code.n:
        raise PatternSetError("pattern set length does not match code")
    n = code.n
    cap = pattern_set.T if query_limit is None else min(query_limit, pattern_set.T)
    counters = WorkCounters()
    hard = profile.hard_bits
    target = code.syndrome_int(hard)
    r = profile.ranking.tolist()
    hcol_r = code.h_cols_np[profile.ranking]
    nk = n - code.k

    t = 0
    hit_bits = None
    if tester is None:
        hit_at = _scan_blocks(pattern_set, cap, hcol_r, target, nk, counters)
        if hit_at is None:
            t = cap
        else:
            t = hit_at + 1
            b = 0
            for j in pattern_set.patterns[hit_at]:
                b |= 1 << r[j]
            hit_bits = b
    else:
        for s in pattern_set.patterns[:cap]:
            t += 1
            b = 0
            for j in s:
                b |= 1 << r[j]
            if tester(b):
                hit_bits = b
                break

    prefix = OrbPrefix(pattern_set, profile, t)
    if hit_bits is not None:
        tree = EPTree(profile, code)
        zeta = zeta_direct(hit_bits, profile)
        counters.zeta_adds += n
        ep = ErrorPattern(hit_bits, zeta, tree.depth_of(hit_bits),
                          code.syndrome_int(hit_bits), tree.rank_key_of(hit_bits))
        word = bitvec.unpack(hard ^ hit_bits, n)
        return (DecodeResult(word, ep, zeta, t, t, VALID_FOUND, counters=counters),
                prefix)
    return (DecodeResult(None, None, None, t, t, QUERY_LIMIT, counters=counters),
            prefix)


def _scan_blocks(pattern_set: AbstractPatternSet, cap: int,
                 hcol_r: np.ndarray, target: int, nk: int,
                 counters: WorkCounters) -> Optional[int]:
    """Vectorized syndrome scan of patterns[:cap] in geometric blocks.

    Returns the index of the first pattern matching the target syndrome,
    or None.  Block growth keeps the scan O(hit index) while letting
    numpy do the per-pattern column XOR reductions.
    """
    flat, starts = pattern_set.flat_supports()
    cols = np.append(hcol_r, np.uint64(0))   # sentinel rank n -> 0
    target64 = np.uint64(target)
    a = 0
    size = 64
    while a < cap:
        b = min(a + size, cap)
        lo = int(starts[a])
        hi = int(starts[b]) if b < pattern_set.T else len(flat)
        syns = np.bitwise_xor.reduceat(cols[flat[lo:hi]], starts[a:b] - lo)
        counters.parity_bit_ops += (hi - lo - (b - a)) * nk
        hits = np.flatnonzero(syns == target64)
        if hits.size:
            return a + int(hits[0])
        a = b
        size = min(size * 4, 1 << 18)
    return None


# -- persistence -----------------------------------------------------------
# header: "ORBSET v1 n=<n> T=<T> gamma=<descriptor> order=<tag>"
# then one pattern per line as 1-based sorted rank indices (blank = all-zero).

def save_pattern_set(pattern_set: AbstractPatternSet, path: str) -> None:
    with open(path, "w") as f:
        f.write(f"{FORMAT_TAG} {FORMAT_VERSION} n={pattern_set.n} "
                f"T={pattern_set.T} gamma={pattern_set.gamma_desc} "
                f"order={TIE_ORDER}\n")
        for s in pattern_set.patterns:
            f.write(" ".join(str(j + 1) for j in s) + "\n")


def load_pattern_set(path: str, validate: bool = True) -> AbstractPatternSet:
    with open(path) as f:
        header = f.readline().split()
        if len(header) < 4 or header[0] != FORMAT_TAG:
            raise PatternSetError("not a pattern set file")
        if header[1] != FORMAT_VERSION:
            raise PatternSetError(f"unsupported format version {header[1]!r}")
        fields = dict(tok.split("=", 1) for tok in header[2:] if "=" in tok)
        try:
            n = int(fields["n"])
            T = int(fields["T"])
        except (KeyError, ValueError) as e:
            raise PatternSetError("bad pattern set header") from e
        gamma_desc = fields.get("gamma", "external")
        patterns: list[tuple[int, ...]] = []
        for line in f:
            line = line.strip()
            if line.startswith("#"):
                continue
            if not line:
                patterns.append(())
                continue
            idx = tuple(int(x) - 1 for x in line.split())
            if any(j < 0 or j >= n for j in idx) or list(idx) != sorted(set(idx)):
                raise PatternSetError("bad pattern line")
            patterns.append(idx)
    # trailing blank lines are not distinguishable from the all-zero
    # pattern, so the count in the header is authoritative
    if len(patterns) < T:
        raise PatternSetError(f"truncated file: {len(patterns)} of {T} patterns")
    patterns = patterns[:T]
    ps = AbstractPatternSet(n=n, T=T, gamma_desc=gamma_desc, patterns=patterns)
    if validate:
        validate_ordering(ps)
    return ps


def validate_ordering(ps: AbstractPatternSet, sample_limit: int = 100_000) -> None:
    """Check non-decreasing gamma weight on adjacent pairs.

    Full scan up to sample_limit patterns, random adjacent samples beyond.
    Skipped for external sets whose gamma is unknown.
    """
    gamma = ps.gamma()
    if gamma is None:
        return

    def w(s):
        return sum(float(gamma[j]) for j in s)

    if ps.T <= sample_limit:
        pairs = range(ps.T - 1)
    else:
        rng = np.random.default_rng(0)
        pairs = sorted(rng.integers(0, ps.T - 1, size=10_000).tolist())
    for i in pairs:
        if w(ps.patterns[i]) > w(ps.patterns[i + 1]) + 1e-9:
            raise PatternSetError(f"ordering violated at index {i}")
