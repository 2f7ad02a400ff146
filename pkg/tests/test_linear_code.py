import numpy as np
import pytest

from grandkit import bitvec
from grandkit.linear_code import (CodeError, _min_distance_bruteforce,
                                  build_code, load_parity_file,
                                  save_parity_file)


@pytest.mark.parametrize("spec,nk,d", [
    ("bch:127,106", 21, 7),
    ("bch:127,113", 14, 5),
    ("hamming:7,4", 3, 3),
    ("hamming:15,11", 4, 3),
    ("bch:15,7", 8, 5),
    ("bch:31,21", 10, 5),
])
def test_construction(spec, nk, d):
    code = build_code(spec)
    assert code.n - code.k == nk
    assert code.d_min == d
    # generator and parity check must annihilate each other
    assert not np.any((code.generator @ code.parity_check.T) % 2)


def test_bch127_distance_sampling():
    # every sampled nonzero codeword must weigh at least the designed
    # distance; exact distances are checked on the small instances below
    code = build_code("bch:127,106")
    rng = np.random.default_rng(1)
    msgs = rng.integers(0, 2, (2000, code.k)).astype(np.uint8)
    words = code.encode(msgs)
    weights = words.sum(axis=1)
    nz = weights[np.any(msgs, axis=1)]
    assert nz.min() >= 7


@pytest.mark.parametrize("spec", ["hamming:7,4", "hamming:15,11", "bch:15,7"])
def test_exact_min_distance_small(spec):
    code = build_code(spec)
    assert _min_distance_bruteforce(code) == code.d_min


@pytest.mark.slow
def test_exact_min_distance_bch3121(bch3121):
    assert _min_distance_bruteforce(bch3121) == 5


def test_hamming_min_distance_by_enumeration(hamming74):
    # all 16 codewords explicitly
    msgs = ((np.arange(16)[:, None] >> np.arange(4)) & 1).astype(np.uint8)
    words = hamming74.encode(msgs)
    assert len({tuple(w) for w in words}) == 16
    weights = words.sum(axis=1)
    assert weights[1:].min() == 3 or sorted(weights)[1] == 3


def test_encode_zero_and_ones(hamming74):
    zero = hamming74.encode(np.zeros(4, dtype=np.uint8))
    assert not zero.any()
    ones = hamming74.encode(np.ones(4, dtype=np.uint8))
    assert not hamming74.syndrome(ones).any()


def test_encode_systematic_and_roundtrip(bch127113):
    rng = np.random.default_rng(2)
    u = rng.integers(0, 2, bch127113.k).astype(np.uint8)
    w = bch127113.encode(u)
    assert not bch127113.syndrome(w).any()
    assert np.array_equal(w[: bch127113.k], u)


def test_encode_length_mismatch(hamming74):
    with pytest.raises(CodeError):
        hamming74.encode(np.zeros(5, dtype=np.uint8))


def test_syndrome_of_codeword_and_units(hamming74):
    rng = np.random.default_rng(3)
    u = rng.integers(0, 2, 4).astype(np.uint8)
    w = hamming74.encode(u)
    assert not hamming74.syndrome(w).any()
    for i in range(hamming74.n):
        v = w.copy()
        v[i] ^= 1
        assert np.array_equal(hamming74.syndrome(v), hamming74.parity_check[:, i])


def test_syndrome_weight3_matches_matrix_multiply(bch127113):
    rng = np.random.default_rng(4)
    for _ in range(20):
        w = bch127113.encode(rng.integers(0, 2, bch127113.k).astype(np.uint8))
        pos = rng.choice(bch127113.n, 3, replace=False)
        e = np.zeros(bch127113.n, dtype=np.uint8)
        e[pos] = 1
        expect = (bch127113.parity_check @ (w ^ e)) % 2
        assert np.array_equal(bch127113.syndrome(w ^ e), expect)
        xor_cols = 0
        for p in pos:
            xor_cols ^= bch127113.h_cols[p]
        assert bch127113.syndrome_int(bitvec.pack(w ^ e)) == xor_cols


def test_syndrome_linearity(bch3121):
    rng = np.random.default_rng(5)
    for _ in range(50):
        a = rng.integers(0, 2, bch3121.n).astype(np.uint8)
        b = rng.integers(0, 2, bch3121.n).astype(np.uint8)
        lhs = bch3121.syndrome(a ^ b)
        rhs = bch3121.syndrome(a) ^ bch3121.syndrome(b)
        assert np.array_equal(lhs, rhs)


def test_syndrome_int_matches_array_path(bch127113):
    rng = np.random.default_rng(6)
    for _ in range(50):
        v = rng.integers(0, 2, bch127113.n).astype(np.uint8)
        s_arr = bch127113.syndrome(v)
        s_int = bch127113.syndrome_int(bitvec.pack(v))
        assert bitvec.pack(s_arr) == s_int


def test_unsupported_specs():
    for bad in ("bch:127,100", "bch:126,106", "hamming:7,3", "nonsense:1,2",
                "bch:127"):
        with pytest.raises(CodeError):
            build_code(bad)


def test_parity_file_roundtrip(tmp_path, hamming74):
    path = tmp_path / "H.txt"
    save_parity_file(hamming74, str(path))
    loaded = load_parity_file(str(path))
    assert loaded.n == 7 and loaded.k == 4
    assert np.array_equal(loaded.parity_check, hamming74.parity_check)
    assert loaded.d_min == 3
    # same code: syndromes agree on random vectors
    rng = np.random.default_rng(7)
    for _ in range(20):
        v = rng.integers(0, 2, 7).astype(np.uint8)
        assert np.array_equal(loaded.syndrome(v), hamming74.syndrome(v))


def test_parity_file_not_full_rank(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("4 2\n1100\n1100\n")
    with pytest.raises(CodeError):
        load_parity_file(str(path))


def test_parity_file_malformed(tmp_path):
    path = tmp_path / "bad2.txt"
    path.write_text("4 2\n11\n")
    with pytest.raises(CodeError):
        load_parity_file(str(path))


def test_explicit_code_systematic_positions(tmp_path):
    # parity file whose pivots are not the trailing columns
    path = tmp_path / "H.txt"
    path.write_text("5 2\n10101\n01011\n11000\n")
    code = load_parity_file(str(path))
    assert code.k == 2
    rng = np.random.default_rng(8)
    for _ in range(8):
        u = rng.integers(0, 2, 2).astype(np.uint8)
        w = code.encode(u)
        assert not code.syndrome(w).any()
        assert np.array_equal(w[list(code.info_positions)], u)
