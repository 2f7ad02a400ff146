import numpy as np
import pytest

from grandkit import bitvec
from grandkit.channel import ChannelConfig, observe, transmit
from grandkit.oracle import (enumerate_all_eps_sorted, ml_decode_bruteforce,
                             ml_zeta_batch, nearest_codeword)
from tests.conftest import random_profile


def test_hard_decision_codeword_is_returned(hamming74):
    rng = np.random.default_rng(0)
    u = rng.integers(0, 2, 4).astype(np.uint8)
    w = hamming74.encode(u)
    cfg = ChannelConfig(6.0, 4 / 7)
    prof = observe(1.0 - 2.0 * w.astype(float), cfg)  # noiseless
    word, zeta = ml_decode_bruteforce(prof, hamming74)
    assert np.array_equal(word, w)
    assert zeta == 0.0


def test_single_weak_flip_is_corrected(hamming74):
    rng = np.random.default_rng(1)
    cfg = ChannelConfig(5.0, 4 / 7)
    for _ in range(50):
        u = rng.integers(0, 2, 4).astype(np.uint8)
        w = hamming74.encode(u)
        y = 1.0 - 2.0 * w.astype(float)
        i = int(rng.integers(7))
        y[i] = -0.05 * y[i]  # barely flipped, least reliable position
        prof = observe(y, cfg)
        word, _ = ml_decode_bruteforce(prof, hamming74)
        assert np.array_equal(word, w)


def test_agreement_with_euclidean_oracle(hamming1511):
    cfg = ChannelConfig(3.0, 11 / 15)
    agree = 0
    trials = 1000
    for t in range(trials):
        rng = np.random.default_rng(t)
        w = np.zeros(15, dtype=np.uint8)
        y = transmit(w, cfg, rng)
        prof = observe(y, cfg)
        word, _ = ml_decode_bruteforce(prof, hamming1511)
        nearest = nearest_codeword(y, hamming1511)
        agree += int(np.array_equal(word, nearest))
    assert agree == trials


def test_likelihood_crosscheck(hamming1511):
    rng = np.random.default_rng(2)
    for _ in range(300):
        prof = random_profile(15, rng, hamming1511, ebno_db=2.0)
        ml_decode_bruteforce(prof, hamming1511, crosscheck=True)


def test_batch_zetas_match_single(bch3121):
    rng = np.random.default_rng(3)
    profs = [random_profile(31, rng, bch3121, ebno_db=3.0) for _ in range(64)]
    hards = np.stack([p.hard for p in profs])
    ells = np.stack([p.ell for p in profs])
    batch = ml_zeta_batch(bch3121, hards, ells)
    for i, prof in enumerate(profs):
        _, z = ml_decode_bruteforce(prof, bch3121)
        assert abs(batch[i] - z) < 1e-3 * (1.0 + abs(z))


def test_enumeration_matches_worked_example(example1_profile):
    order = enumerate_all_eps_sorted(example1_profile)
    first = [(bitvec.to_str(b, 4), round(z, 6)) for b, z in order[:5]]
    assert first == [("0000", 0.0), ("0010", 0.8), ("1000", 1.2),
                     ("1010", 2.0), ("0100", 2.1)]
    assert len(order) == 16
    zetas = [z for _, z in order]
    assert zetas == sorted(zetas)


def test_enumeration_constant_ell_orders_by_weight():
    from grandkit.channel import profile_from_reliabilities
    prof = profile_from_reliabilities([1.0] * 6)
    order = enumerate_all_eps_sorted(prof)
    weights = [bin(b).count("1") for b, _ in order]
    assert weights == sorted(weights)


def test_size_limits(hamming74):
    from grandkit.channel import profile_from_reliabilities
    with pytest.raises(ValueError):
        enumerate_all_eps_sorted(
            profile_from_reliabilities(np.arange(1, 17, dtype=float)))
    from grandkit.linear_code import build_code
    big = build_code("bch:127,106")
    rng = np.random.default_rng(4)
    with pytest.raises(ValueError):
        ml_decode_bruteforce(random_profile(127, rng, big), big)
