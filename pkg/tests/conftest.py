import numpy as np
import pytest

from grandkit.channel import profile_from_reliabilities
from grandkit.linear_code import build_code

# Reliability profile used across the worked examples: the ranking sorts
# positions as (2, 0, 1, 3) in 0-based indexing.
EXAMPLE1_ELL = [1.2, 2.1, 0.8, 3.4]


@pytest.fixture(scope="session")
def example1_profile():
    return profile_from_reliabilities(EXAMPLE1_ELL)


@pytest.fixture(scope="session")
def hamming74():
    return build_code("hamming:7,4")


@pytest.fixture(scope="session")
def hamming1511():
    return build_code("hamming:15,11")


@pytest.fixture(scope="session")
def bch3121():
    return build_code("bch:31,21")


@pytest.fixture(scope="session")
def bch127113():
    return build_code("bch:127,113")


def random_profile(n, rng, code=None, ebno_db=4.0):
    """One AWGN trial of the all-zero codeword at the given Eb/N0."""
    from grandkit.channel import ChannelConfig, observe, transmit

    rate = (code.k / code.n) if code is not None else 0.5
    cfg = ChannelConfig(ebno_db, rate)
    w = np.zeros(n, dtype=np.uint8)
    y = transmit(w, cfg, rng)
    return observe(y, cfg)
