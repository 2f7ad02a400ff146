"""Hybrid decoding: a pattern-set first stage refined by parallel SGRAND.

Stage 1 runs the ORBGRAND schedule.  The tested prefix always forms a
root-containing subtree of the EP tree, so its envelope (children of
tested nodes that were not themselves tested) is a set of pairwise
non-ancestral nodes covering exactly the untested patterns.  Stage 2
resumes parallel SGRAND from that envelope with the stage-1 incumbent,
which yields the ML answer without ever retesting a pattern.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channel import ReliabilityProfile
from .ep_tree import EPTree, ErrorPattern, zeta_direct
from .linear_code import LinearCode
from .orbgrand import AbstractPatternSet, OrbPrefix, orb_decode
from .psgrand import BatchSchedule, ResumeState, _pos_masks, psgrand_decode
from .sgrand import DecodeResult, QUERY_LIMIT


class EnvelopeError(ValueError):
    pass


@dataclass
class Envelope:
    members: list[ErrorPattern]

    def bits_set(self) -> set[int]:
        return {e.bits for e in self.members}


def compute_envelope(tested, profile: ReliabilityProfile,
                     code: LinearCode | None) -> Envelope:
    """Envelope of a tested prefix: untested children of tested nodes.

    `tested` is either a list of packed patterns in test order or an
    OrbPrefix.  The prefix must be a root-containing subtree (parents
    tested before children); anything else raises.
    """
    if isinstance(tested, OrbPrefix):
        return _envelope_from_prefix(tested, profile, code)
    return _envelope_from_bits(list(tested), profile, code)


def _envelope_from_bits(tested_bits: list[int], profile: ReliabilityProfile,
                        code: LinearCode | None) -> Envelope:
    tree = EPTree(profile, code)
    if not tested_bits or tested_bits[0] != 0:
        raise EnvelopeError("tested prefix must start at the all-zero pattern")
    nodes: dict[int, ErrorPattern] = {0: tree.root()}
    for bits in tested_bits[1:]:
        if bits in nodes:
            raise EnvelopeError("tested prefix repeats a pattern")
        parent_bits = tree.parent_of(bits)
        parent = nodes.get(parent_bits)
        if parent is None:
            raise EnvelopeError("tested prefix is not a root-containing subtree")
        nodes[bits] = tree.node_from_parent(parent, bits)
    members = []
    for node in nodes.values():
        for child in tree.children(node):
            if child.bits not in nodes:
                members.append(child)
    return Envelope(members)


def _envelope_from_prefix(prefix: OrbPrefix, profile: ReliabilityProfile,
                          code: LinearCode | None) -> Envelope:
    """Envelope directly from rank-domain supports.

    Children in the rank domain map to children in the concrete tree
    under the ranking permutation, and every quantity of an envelope
    member follows from its support alone, so no parent walk is needed.
    """
    ps = prefix.pattern_set
    t0 = prefix.count
    n = ps.n
    index = ps.index_of()
    tree = EPTree(profile, code)

    def in_prefix(support: tuple[int, ...]) -> bool:
        b = 0
        for j in support:
            b |= 1 << j
        i = index.get(b)
        return i is not None and i < t0

    member_supports: list[tuple[int, ...]] = []
    for s in ps.patterns[:t0]:
        top = s[-1] if s else -1
        if top == n - 1:
            continue
        if not s:
            kids = ((0,),)
        else:
            kids = (s[:-1] + (top + 1,), s + (top + 1,))
        for c in kids:
            if not in_prefix(c):
                member_supports.append(c)

    r = [int(p) for p in profile.ranking]
    hcol_r = [code.h_cols[p] for p in r] if code is not None else [0] * n
    ell_r = profile.ell_ranked
    members = []
    for s in member_supports:
        bits = 0
        syn = 0
        z = 0.0
        for j in s:
            bits |= 1 << r[j]
            syn ^= hcol_r[j]
            z += float(ell_r[j])
        key = 0
        for j in s:
            key |= 1 << (n - 1 - j)
        members.append(ErrorPattern(bits, z, (s[-1] + 1) if s else 0, syn, key))
    return Envelope(members)


def _envelope_arrays(prefix: OrbPrefix, profile: ReliabilityProfile,
                     code: LinearCode):
    """Envelope of a pattern-set prefix as frontier arrays.

    Parent soft weights, syndromes, and packed bits come from one
    vectorized reduction over the prefix supports; each envelope member
    is then a single add-next or shift-top adjustment of its parent.
    """
    ps = prefix.pattern_set
    t0 = prefix.count
    n = ps.n
    cl, cr = ps.child_tables()
    tops = ps.tops()[:t0]
    flat, starts = ps.flat_supports()
    lo_f = int(starts[0])
    hi_f = int(starts[t0]) if t0 < ps.T else len(flat)
    seg = starts[:t0] - lo_f
    flat_seg = flat[lo_f:hi_f]

    r = np.asarray(profile.ranking, dtype=np.int64)
    ell_ext = np.append(profile.ell_ranked, 0.0)
    hcol_rank = np.append(code.h_cols_np[r], np.uint64(0))
    plo_all, phi_all = _pos_masks(n)
    plo = plo_all[r]
    phi = phi_all[r]
    plo_ext = np.append(plo, np.uint64(0))
    phi_ext = np.append(phi, np.uint64(0))

    z_par = np.add.reduceat(ell_ext[flat_seg], seg)
    sy_par = np.bitwise_xor.reduceat(hcol_rank[flat_seg], seg)
    lo_par = np.bitwise_or.reduceat(plo_ext[flat_seg], seg)
    hi_par = np.bitwise_or.reduceat(phi_ext[flat_seg], seg)

    grow = tops < n - 1
    in_prefix_r = (cr[:t0] >= 0) & (cr[:t0] < t0)
    in_prefix_l = (cl[:t0] >= 0) & (cl[:t0] < t0)
    right_m = grow & ~in_prefix_r
    left_m = grow & (tops >= 0) & ~in_prefix_l

    tr = tops[right_m]
    r_z = z_par[right_m] + profile.ell_ranked[tr + 1]
    r_sy = sy_par[right_m] ^ hcol_rank[tr + 1]
    r_lo = lo_par[right_m] | plo[tr + 1]
    r_hi = hi_par[right_m] | phi[tr + 1]
    r_d = tr + 2

    tl = tops[left_m]
    l_z = z_par[left_m] + profile.ell_ranked[tl + 1] - profile.ell_ranked[tl]
    l_sy = sy_par[left_m] ^ hcol_rank[tl + 1] ^ hcol_rank[tl]
    l_lo = (lo_par[left_m] & ~plo[tl]) | plo[tl + 1]
    l_hi = (hi_par[left_m] & ~phi[tl]) | phi[tl + 1]
    l_d = tl + 2

    return (np.concatenate([l_z, r_z]),
            np.concatenate([l_lo, r_lo]),
            np.concatenate([l_hi, r_hi]),
            np.concatenate([l_sy, r_sy]).astype(np.uint64),
            np.concatenate([l_d, r_d]))


def hybrid_decode(profile: ReliabilityProfile, code: LinearCode,
                  pattern_set: AbstractPatternSet,
                  schedule: BatchSchedule = BatchSchedule(),
                  prune: bool = True, early_term: bool = True,
                  recursive: bool = True,
                  query_limit: Optional[int] = None,
                  want_trace: bool = False,
                  collect_tested: bool = False) -> DecodeResult:
    """Pattern-set stage, envelope hand-off, parallel SGRAND refinement."""
    stage1, prefix = orb_decode(profile, code, pattern_set,
                                query_limit=query_limit)
    budget_left = None if query_limit is None else query_limit - stage1.queries
    if budget_left is not None and budget_left <= 0:
        stage1.termination = QUERY_LIMIT
        if collect_tested:
            stage1.tested_bits = prefix.concrete_bits()
        return stage1

    resume = ResumeState(frontier=_envelope_arrays(prefix, profile, code),
                         e_star=stage1.ep)
    stage2 = psgrand_decode(profile, code, schedule,
                            prune=prune, early_term=early_term,
                            recursive=recursive, resume=resume,
                            query_limit=budget_left,
                            want_trace=want_trace,
                            collect_tested=collect_tested)
    stage2.queries += stage1.queries
    stage2.counters.parity_bit_ops += stage1.counters.parity_bit_ops
    stage2.counters.zeta_adds += stage1.counters.zeta_adds
    if collect_tested:
        stage2.tested_bits = prefix.concrete_bits() + (stage2.tested_bits or [])
    return stage2
