"""Binary tree over error patterns, ordered by the reliability ranking.

Every length-n binary vector appears exactly once as a node.  The root
is the all-zero pattern and has a single child (flip the least reliable
position).  A node whose highest-ranked flipped position is rank j-1
(0-based), i.e. depth j, has two children when j < n:

  left  : move the flip at rank j-1 to rank j
  right : additionally flip rank j

Soft weight, depth, and syndrome of a child all follow from the parent
in O(1), so only frontier nodes ever materialize.
"""

from __future__ import annotations

import numpy as np

from .channel import ReliabilityProfile
from .linear_code import LinearCode


class ErrorPattern:
    """One EP tree node with cached soft weight, depth, and syndrome.

    rank_key packs the pattern's bits read in ranking order, most
    reliable-ranked bit first, so integer comparison of rank_key is the
    lexicographic tie rule shared by every decoder and oracle.
    """

    __slots__ = ("bits", "soft_weight", "depth", "syndrome", "rank_key")

    def __init__(self, bits: int, soft_weight: float, depth: int,
                 syndrome: int, rank_key: int):
        self.bits = bits
        self.soft_weight = soft_weight
        self.depth = depth
        self.syndrome = syndrome
        self.rank_key = rank_key

    def __lt__(self, other: "ErrorPattern") -> bool:
        if self.soft_weight != other.soft_weight:
            return self.soft_weight < other.soft_weight
        return self.rank_key < other.rank_key

    def __le__(self, other: "ErrorPattern") -> bool:
        return not other < self

    def order_key(self) -> tuple[float, int]:
        return (self.soft_weight, self.rank_key)

    def __repr__(self):
        return (f"ErrorPattern(bits={self.bits:#x}, zeta={self.soft_weight:.6g}, "
                f"depth={self.depth})")


def zeta_direct(bits: int, profile: ReliabilityProfile) -> float:
    """Soft weight computed from scratch: sum of ell over flipped positions."""
    z = 0.0
    ell = profile.ell
    i = 0
    while bits:
        if bits & 1:
            z += ell[i]
        bits >>= 1
        i += 1
    return z


def depth_of_bits(bits: int, rank_of: list[int]) -> int:
    """Depth (1 + highest flipped rank) from raw bits and the inverse ranking."""
    d = 0
    pos = 0
    while bits:
        if bits & 1:
            r = rank_of[pos] + 1
            if r > d:
                d = r
        bits >>= 1
        pos += 1
    return d


def rank_key_of_bits(bits: int, rank_of: list[int], n: int) -> int:
    """Tie key: pattern bits read in ranking order, first rank most significant."""
    key = 0
    top = n - 1
    pos = 0
    while bits:
        if bits & 1:
            key |= 1 << (top - rank_of[pos])
        bits >>= 1
        pos += 1
    return key


class EPTree:
    """Child generation over a fixed (profile, code) pair.

    The code may be omitted for pure ordering work (enumeration tests);
    syndromes then stay at zero.
    """

    def __init__(self, profile: ReliabilityProfile, code: LinearCode | None = None):
        self.profile = profile
        self.n = profile.n
        self.ell_ranked = profile.ell_ranked.tolist()
        r = profile.ranking
        if code is not None:
            if code.n != self.n:
                raise ValueError("code length does not match profile")
            self.hcol_ranked = code.h_cols_np[r].tolist()
        else:
            self.hcol_ranked = [0] * self.n
        self.pos_ranked = r.tolist()
        inv = np.empty(self.n, dtype=np.int64)
        inv[r] = np.arange(self.n)
        self.rank_of = inv.tolist()

    def root(self) -> ErrorPattern:
        return ErrorPattern(0, 0.0, 0, 0, 0)

    def children(self, e: ErrorPattern) -> tuple[ErrorPattern, ...]:
        d = e.depth
        n = self.n
        if d == n:
            return ()
        nxt = self.pos_ranked[d]
        dz = self.ell_ranked[d]
        ds = self.hcol_ranked[d]
        key_step = 1 << (n - 1 - d)
        right = ErrorPattern(
            e.bits | (1 << nxt),
            e.soft_weight + dz,
            d + 1,
            e.syndrome ^ ds,
            e.rank_key + key_step,
        )
        if d == 0:
            return (right,)
        cur = self.pos_ranked[d - 1]
        left = ErrorPattern(
            (e.bits ^ (1 << cur)) | (1 << nxt),
            e.soft_weight + dz - self.ell_ranked[d - 1],
            d + 1,
            e.syndrome ^ ds ^ self.hcol_ranked[d - 1],
            e.rank_key - key_step,
        )
        return (left, right)

    def depth_of(self, bits: int) -> int:
        """Depth (1 + highest flipped rank) computed from raw bits."""
        return depth_of_bits(bits, self.rank_of)

    def parent_of(self, bits: int) -> int:
        """Bits of the unique parent of a nonzero pattern."""
        if bits == 0:
            raise ValueError("root has no parent")
        d = self.depth_of(bits)
        top = self.pos_ranked[d - 1]
        if d == 1:
            return 0
        below = self.pos_ranked[d - 2]
        if (bits >> below) & 1:
            return bits ^ (1 << top)              # was a right child
        return (bits ^ (1 << top)) | (1 << below)  # was a left child

    def node_from_parent(self, parent: ErrorPattern, bits: int) -> ErrorPattern:
        """Materialize a known child of parent (given its bits) in O(1)."""
        for c in self.children(parent):
            if c.bits == bits:
                return c
        raise ValueError("bits is not a child of parent")

    def rank_key_of(self, bits: int) -> int:
        return rank_key_of_bits(bits, self.rank_of, self.n)
