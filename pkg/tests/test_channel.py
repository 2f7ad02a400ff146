import math

import numpy as np
import pytest

from grandkit.channel import (ChannelConfig, observe,
                              profile_from_reliabilities, transmit)


def qfunc(x):
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def test_sigma_mapping():
    cfg = ChannelConfig(5.0, 113 / 127)
    assert cfg.sigma ** 2 == pytest.approx(
        1.0 / (2.0 * (113 / 127) * 10 ** 0.5))


def test_transmit_noiseless_limit():
    cfg = ChannelConfig(80.0, 0.5)  # sigma ~ 4e-5
    rng = np.random.default_rng(0)
    w = np.array([0, 1, 0, 1, 1], dtype=np.uint8)
    y = transmit(w, cfg, rng)
    assert np.allclose(y, 1.0 - 2.0 * w, atol=1e-3)
    prof = observe(y, cfg)
    assert np.array_equal(prof.hard, w)
    assert sorted(prof.ranking.tolist()) == list(range(5))


def test_transmit_deterministic():
    cfg = ChannelConfig(3.0, 0.5)
    w = np.zeros(16, dtype=np.uint8)
    y1 = transmit(w, cfg, np.random.default_rng(42))
    y2 = transmit(w, cfg, np.random.default_rng(42))
    assert np.array_equal(y1, y2)


def test_observe_ranking_matches_worked_example(example1_profile):
    # reliabilities (1.2, 2.1, 0.8, 3.4) rank as positions (3,1,2,4) 1-based
    assert example1_profile.ranking.tolist() == [2, 0, 1, 3]


def test_observe_llr_magnitudes():
    cfg = ChannelConfig(4.0, 0.5)
    y = np.array([0.5, -1.25, 2.0])
    prof = observe(y, cfg)
    assert np.allclose(prof.ell, np.abs(2.0 * y / cfg.sigma ** 2))
    assert prof.hard.tolist() == [0, 1, 0]


def test_all_positive_gives_zero_hard():
    cfg = ChannelConfig(4.0, 0.5)
    prof = observe(np.abs(np.random.default_rng(1).normal(size=32)) + 0.01, cfg)
    assert not prof.hard.any()


def test_tie_breaking_is_stable():
    prof = profile_from_reliabilities([2.0, 1.0, 2.0, 1.0])
    # equal values keep lower position first
    assert prof.ranking.tolist() == [1, 3, 0, 2]


def test_monotone_relabeling_preserves_ranking():
    rng = np.random.default_rng(2)
    ell = rng.random(64)
    p1 = profile_from_reliabilities(ell)
    p2 = profile_from_reliabilities(np.exp(3.0 * ell) - 0.5)
    assert np.array_equal(p1.ranking, p2.ranking)


def test_hard_error_rate_matches_q_function():
    cfg = ChannelConfig(3.0, 0.5)
    rng = np.random.default_rng(3)
    n_bits = 400_000
    w = np.zeros(n_bits, dtype=np.uint8)
    y = transmit(w, cfg, rng)
    p_meas = float((y < 0).mean())
    p_theory = qfunc(1.0 / cfg.sigma)
    sd = math.sqrt(p_theory * (1 - p_theory) / n_bits)
    assert abs(p_meas - p_theory) <= 3 * sd


def test_profile_validation():
    with pytest.raises(ValueError):
        profile_from_reliabilities([-1.0, 2.0])
