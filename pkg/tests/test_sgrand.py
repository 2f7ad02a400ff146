import numpy as np
import pytest

from grandkit import bitvec
from grandkit.channel import profile_from_reliabilities
from grandkit.ep_tree import EPTree, ErrorPattern
from grandkit.linear_code import build_code
from grandkit.oracle import enumerate_all_eps_sorted, ml_decode_bruteforce
from grandkit.sgrand import (EPGenerator, HeapFrontier, frontier_step,
                             make_frontier, sgrand_decode, FRONTIER_EXHAUSTED,
                             QUERY_LIMIT, VALID_FOUND)
from tests.conftest import random_profile

TABLE_GOLDEN = [
    ("0000", 0.0, {"0010"}),
    ("0010", 0.8, {"1000", "1010"}),
    ("1000", 1.2, {"0100", "1100", "1010"}),
    ("1010", 2.0, {"0100", "1100", "0110", "1110"}),
    ("0100", 2.1, {"0001", "0101", "1100", "0110", "1110"}),
]


@pytest.mark.parametrize("backing", ["heap", "array"])
def test_first_five_steps_golden(example1_profile, backing):
    gen = EPGenerator(example1_profile, backing=backing)
    for want_ep, want_zeta, want_frontier in TABLE_GOLDEN:
        ep = gen.next_ep()
        assert bitvec.to_str(ep.bits, 4) == want_ep
        assert ep.soft_weight == pytest.approx(want_zeta)
        got = {bitvec.to_str(b, 4) for b in gen.frontier_bits()}
        assert got == want_frontier


def _heap_from_example(example1_profile):
    """The example heap state after five expansions, in its stated layout:
    level order (2.9/0110), (3.3/1100), (5.5/0101), (3.4/0001), (4.1/1110)."""
    tree = EPTree(example1_profile)
    by_bits = {}
    stack = [tree.root()]
    while stack:
        node = stack.pop()
        by_bits[bitvec.to_str(node.bits, 4)] = node
        if node.depth < 4:
            stack.extend(tree.children(node))
    layout = ["0110", "1100", "0101", "0001", "1110"]
    return HeapFrontier.from_list([by_bits[s] for s in layout]), tree


def test_heap_trace_golden(example1_profile):
    frontier, tree = _heap_from_example(example1_profile)
    popped = frontier.pop_min()
    assert bitvec.to_str(popped.bits, 4) == "0110"
    assert popped.soft_weight == pytest.approx(2.9)
    # after deletion the heap reads (3.3/1100), (3.4/0001), (5.5/0101), (4.1/1110)
    assert [bitvec.to_str(e.bits, 4) for e in frontier.as_list()] == \
        ["1100", "0001", "0101", "1110"]
    frontier_step(frontier, popped, tree)
    # children (0011, 4.2) and (0111, 6.3) slot in without reshuffles
    final = [(bitvec.to_str(e.bits, 4), round(e.soft_weight, 6))
             for e in frontier.as_list()]
    assert final == [("1100", 3.3), ("0001", 3.4), ("0101", 5.5),
                     ("1110", 4.1), ("0011", 4.2), ("0111", 6.3)]
    # heap property
    lst = frontier.as_list()
    for i in range(1, len(lst)):
        assert not lst[i] < lst[(i - 1) // 2]


def test_from_list_rejects_non_heap(example1_profile):
    tree = EPTree(example1_profile)
    a = tree.root()
    b = tree.children(a)[0]
    with pytest.raises(ValueError):
        HeapFrontier.from_list([b, a])


def test_frontier_step_on_root(example1_profile):
    tree = EPTree(example1_profile)
    frontier = make_frontier("heap")
    root = tree.root()
    frontier_step(frontier, root, tree)
    assert len(frontier) == 1
    assert bitvec.to_str(frontier.pop_min().bits, 4) == "0010"


def test_frontier_step_on_leaf(example1_profile):
    frontier, tree = _heap_from_example(example1_profile)
    size = len(frontier)
    leaf = next(e for e in frontier.as_list()
                if bitvec.to_str(e.bits, 4) == "0001")
    frontier._heap.remove(leaf)
    import heapq
    heapq.heapify(frontier._heap)
    frontier_step(frontier, leaf, tree)  # depth 4 = leaf, nothing inserted
    assert len(frontier) == size - 1


def test_never_valid_hits_query_limit(example1_profile):
    res = sgrand_decode(example1_profile, _dummy_code(4), query_limit=5,
                        tester=lambda e: False)
    assert res.termination == QUERY_LIMIT
    assert res.queries == 5 and res.codeword is None


def test_never_valid_exhausts_frontier(example1_profile):
    res = sgrand_decode(example1_profile, _dummy_code(4), query_limit=100,
                        tester=lambda e: False)
    assert res.termination == FRONTIER_EXHAUSTED
    assert res.queries == 16


def _dummy_code(n):
    h = np.zeros((1, n), dtype=np.uint8)
    h[0, 0] = 1
    from grandkit.linear_code import LinearCode
    return LinearCode(n=n, k=n - 1, parity_check=h,
                      generator=np.concatenate(
                          [np.zeros((n - 1, 1), dtype=np.uint8),
                           np.eye(n - 1, dtype=np.uint8)], axis=1),
                      d_min=1, info_positions=tuple(range(1, n)))


def test_zeta_order_is_nondecreasing():
    code = build_code("hamming:15,11")
    rng = np.random.default_rng(0)
    for _ in range(30):
        prof = random_profile(15, rng, code)
        res = sgrand_decode(prof, code, 1 << 15, collect_tested=True)
        zetas = [sum(prof.ell[i] for i in bitvec.support(b))
                 for b in res.tested_bits]
        assert all(a <= b + 1e-12 for a, b in zip(zetas, zetas[1:]))


@pytest.mark.parametrize("n", [8, 10, 12])
def test_full_traversal_matches_sorted_enumeration(n):
    rng = np.random.default_rng(n)
    prof = profile_from_reliabilities(rng.random(n) + 0.05)
    res = sgrand_decode(prof, _dummy_code(n), query_limit=1 << n,
                        tester=lambda e: False, collect_tested=True)
    assert res.queries == 1 << n
    assert len(set(res.tested_bits)) == 1 << n
    want = [b for b, _ in enumerate_all_eps_sorted(prof)]
    assert res.tested_bits == want


def test_array_and_heap_produce_identical_sequences():
    rng = np.random.default_rng(5)
    prof = profile_from_reliabilities(rng.random(10) + 0.05)
    runs = {}
    for backing in ("heap", "array"):
        res = sgrand_decode(prof, _dummy_code(10), query_limit=1 << 10,
                            backing=backing, tester=lambda e: False,
                            collect_tested=True)
        runs[backing] = res.tested_bits
    assert runs["heap"] == runs["array"]


def test_ml_against_oracle(hamming1511):
    rng = np.random.default_rng(6)
    for _ in range(300):
        prof = random_profile(15, rng, hamming1511, ebno_db=3.0)
        res = sgrand_decode(prof, hamming1511, 1 << 15)
        word, zeta = ml_decode_bruteforce(prof, hamming1511)
        assert res.termination == VALID_FOUND
        assert res.zeta_star == pytest.approx(zeta, abs=1e-9)
        assert np.array_equal(res.codeword, word)


def test_query_and_row_counters(bch127113):
    rng = np.random.default_rng(7)
    prof = random_profile(127, rng, bch127113, ebno_db=5.0)
    res = sgrand_decode(prof, bch127113, 50_000)
    # one syndrome evaluation per tested pattern, row scans early-exit
    assert res.queries == res.rounds
    assert res.counters.rows_checked >= res.queries
    nk = bch127113.n - bch127113.k
    assert res.counters.rows_checked <= res.queries * nk
    # winning pattern satisfies every parity row
    assert bch127113.syndrome_int(
        prof.hard_bits ^ res.ep.bits) == 0


def test_rejects_bad_inputs(example1_profile, hamming74):
    with pytest.raises(ValueError):
        sgrand_decode(example1_profile, _dummy_code(4), query_limit=0)
    with pytest.raises(ValueError):
        make_frontier("stack")
