import numpy as np

from grandkit import bitvec


def test_pack_unpack_roundtrip():
    rng = np.random.default_rng(0)
    for n in (1, 7, 63, 64, 65, 127):
        v = rng.integers(0, 2, n).astype(np.uint8)
        x = bitvec.pack(v)
        assert np.array_equal(bitvec.unpack(x, n), v)


def test_str_roundtrip():
    x = bitvec.from_str("0110")
    assert x == 0b0110
    assert bitvec.to_str(x, 4) == "0110"


def test_support_and_weight():
    x = bitvec.from_str("1010001")
    assert bitvec.support(x) == [0, 2, 6]
    assert bitvec.weight(x) == 3
