"""Serial SGRAND: best-first EP tree traversal, one test per step.

The frontier holds unexplored tree nodes keyed by soft weight.  Two
interchangeable backings exist on purpose: the heap gives the practical
O(log t) step, while the array scans linearly for the minimum and is
kept as the quadratic baseline for latency-shape comparisons.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import bitvec
from .channel import ReliabilityProfile
from .ep_tree import EPTree, ErrorPattern
from .linear_code import LinearCode

VALID_FOUND = "valid_found"
EARLY_TERM = "early_term"
FRONTIER_EXHAUSTED = "frontier_exhausted"
QUERY_LIMIT = "query_limit"
ML_CERTIFIED = "ml_certified"

TERMINATIONS = frozenset(
    {VALID_FOUND, EARLY_TERM, FRONTIER_EXHAUSTED, QUERY_LIMIT, ML_CERTIFIED}
)


@dataclass
class WorkCounters:
    """Arithmetic-work tallies used by the efficiency comparisons.

    parity_bit_ops counts single parity-bit operations: a full serial row
    evaluation costs n, an incremental syndrome column XOR costs n-k, a
    from-scratch syndrome costs n*(n-k).  zeta_adds counts floating
    additions: 1-2 incrementally, n from scratch.
    """

    parity_bit_ops: int = 0
    zeta_adds: int = 0
    rows_checked: int = 0


@dataclass
class DecodeResult:
    codeword: Optional[np.ndarray]
    ep: Optional[ErrorPattern]
    zeta_star: Optional[float]
    queries: int
    rounds: int
    termination: str
    tau_final: float = float("inf")
    counters: WorkCounters = field(default_factory=WorkCounters)
    trace: Optional[list] = None
    tested_bits: Optional[list] = None

    @property
    def found(self) -> bool:
        return self.codeword is not None


class HeapFrontier:
    """Min-heap frontier; pop order is (soft weight, rank key)."""

    backing = "heap"

    def __init__(self):
        self._heap: list[ErrorPattern] = []

    @classmethod
    def from_list(cls, nodes) -> "HeapFrontier":
        f = cls()
        f._heap = list(nodes)
        for i in range(1, len(f._heap)):
            if f._heap[i] < f._heap[(i - 1) // 2]:
                raise ValueError("node list violates the heap property")
        return f

    def push(self, e: ErrorPattern) -> None:
        heapq.heappush(self._heap, e)

    def pop_min(self) -> ErrorPattern:
        return heapq.heappop(self._heap)

    def min_zeta(self) -> float:
        return self._heap[0].soft_weight if self._heap else float("inf")

    def __len__(self) -> int:
        return len(self._heap)

    def bits_set(self) -> set[int]:
        return {e.bits for e in self._heap}

    def as_list(self) -> list[ErrorPattern]:
        return list(self._heap)


class ArrayFrontier:
    """Unsorted array frontier: min() scan per pop, the quadratic baseline."""

    backing = "array"

    def __init__(self):
        self._items: list[ErrorPattern] = []

    def push(self, e: ErrorPattern) -> None:
        self._items.append(e)

    def pop_min(self) -> ErrorPattern:
        items = self._items
        best = min(items)
        i = items.index(best)
        items[i] = items[-1]
        items.pop()
        return best

    def min_zeta(self) -> float:
        return min(self._items).soft_weight if self._items else float("inf")

    def __len__(self) -> int:
        return len(self._items)

    def bits_set(self) -> set[int]:
        return {e.bits for e in self._items}

    def as_list(self) -> list[ErrorPattern]:
        return list(self._items)


def make_frontier(backing: str):
    if backing == "heap":
        return HeapFrontier()
    if backing == "array":
        return ArrayFrontier()
    raise ValueError(f"unknown frontier backing {backing!r}")


def frontier_step(frontier, popped: ErrorPattern, tree: EPTree):
    """Insert the children of a just-popped minimum back into the frontier."""
    for c in tree.children(popped):
        frontier.push(c)
    return frontier


class EPGenerator:
    """Best-first pattern stream (the serial EP generator).

    next_ep() removes the frontier minimum, inserts its children, and
    returns it; patterns therefore arrive in non-decreasing soft weight.
    """

    def __init__(self, profile: ReliabilityProfile, code: LinearCode | None = None,
                 backing: str = "heap"):
        self.tree = EPTree(profile, code)
        self.frontier = make_frontier(backing)
        self.frontier.push(self.tree.root())

    def next_ep(self) -> Optional[ErrorPattern]:
        if not len(self.frontier):
            return None
        e = self.frontier.pop_min()
        frontier_step(self.frontier, e, self.tree)
        return e

    def frontier_bits(self) -> set[int]:
        return self.frontier.bits_set()


def serial_row_test(code: LinearCode, v: int, counters: WorkCounters) -> bool:
    """Row-by-row parity check of packed vector v, stopping at first failure."""
    rows = 0
    ok = True
    for row in code.h_rows:
        rows += 1
        if (row & v).bit_count() & 1:
            ok = False
            break
    counters.rows_checked += rows
    counters.parity_bit_ops += rows * code.n
    return ok


def sgrand_decode(profile: ReliabilityProfile, code: LinearCode,
                  query_limit: int, backing: str = "heap",
                  tester: Callable[[ErrorPattern], bool] | None = None,
                  collect_tested: bool = False) -> DecodeResult:
    """Serial SGRAND: test EPs in non-decreasing soft weight up to query_limit.

    The default tester checks parity rows of the candidate word
    sequentially, exiting on the first failed row.
    """
    if query_limit < 1:
        raise ValueError("query_limit must be >= 1")
    gen = EPGenerator(profile, code, backing)
    counters = WorkCounters()
    hard = profile.hard_bits
    if tester is None:
        def tester(e: ErrorPattern) -> bool:
            return serial_row_test(code, hard ^ e.bits, counters)
    tested = [] if collect_tested else None
    t = 0
    while t < query_limit:
        e = gen.next_ep()
        if e is None:
            return DecodeResult(None, None, None, t, t, FRONTIER_EXHAUSTED,
                                counters=counters, tested_bits=tested)
        t += 1
        if tested is not None:
            tested.append(e.bits)
        if tester(e):
            word = bitvec.unpack(hard ^ e.bits, code.n)
            return DecodeResult(word, e, e.soft_weight, t, t, VALID_FOUND,
                                counters=counters, tested_bits=tested)
    return DecodeResult(None, None, None, t, t, QUERY_LIMIT,
                        counters=counters, tested_bits=tested)
