"""Packed bit-vector helpers.

Bit vectors of length n are stored as Python ints with bit i holding
position i (position 0 is the leftmost bit when rendered as a string).
Python ints give O(n/word) XOR/AND plus hashability for membership sets.
"""

from __future__ import annotations

import numpy as np


def pack(bits) -> int:
    """Pack an iterable of 0/1 values (position 0 first) into an int."""
    x = 0
    for i, b in enumerate(bits):
        if b:
            x |= 1 << i
    return x


def unpack(x: int, n: int) -> np.ndarray:
    """Unpack an int into a length-n uint8 array, position 0 first."""
    raw = x.to_bytes((n + 7) // 8, "little")
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8),
                         bitorder="little")[:n]


def from_str(s: str) -> int:
    """Parse a bit string like "0110" (leftmost char is position 0)."""
    return pack(int(c) for c in s)


def to_str(x: int, n: int) -> str:
    return "".join("1" if (x >> i) & 1 else "0" for i in range(n))


def support(x: int) -> list[int]:
    """Sorted positions of set bits."""
    out = []
    i = 0
    while x:
        if x & 1:
            out.append(i)
        x >>= 1
        i += 1
    return out


def weight(x: int) -> int:
    return x.bit_count()
