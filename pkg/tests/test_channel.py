import math

import numpy as np
import pytest

from secbroadcast.channel import (BroadcastErasureChannel, ChannelParams, ChannelState,
                                  ScriptedChannel, apply_state, make_rng, sample_state,
                                  state_distribution)
from secbroadcast.errors import DomainError

FIG = ChannelParams(0.7, 0.6)


def test_distribution_is_product_of_marginals():
    assert np.allclose(state_distribution(FIG), (0.18, 0.28, 0.12, 0.42), atol=1e-15)
    assert state_distribution(ChannelParams(1, 1)) == (0, 0, 0, 1)
    assert state_distribution(ChannelParams(0, 0)) == (0, 0, 1, 0)


def test_always_erased_channel():
    ch = BroadcastErasureChannel(ChannelParams(1, 1), make_rng(3))
    assert not ch.sample_states(500).any()


def test_empirical_frequencies_within_3_sigma():
    n = 10 ** 6
    s = BroadcastErasureChannel(FIG, make_rng(2024)).sample_states(n)
    codes = (ChannelState.B, ChannelState.C, ChannelState.BC, ChannelState.NONE)
    for code, p in zip(codes, state_distribution(FIG)):
        sigma = math.sqrt(n * p * (1 - p))
        assert abs((s == code).sum() - n * p) < 3 * sigma


def test_same_seed_same_states():
    a = BroadcastErasureChannel(FIG, make_rng(7, 1, 0)).sample_states(1000)
    b = BroadcastErasureChannel(FIG, make_rng(7, 1, 0)).sample_states(1000)
    c = BroadcastErasureChannel(FIG, make_rng(7, 2, 0)).sample_states(1000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_single_and_block_draws_agree():
    one = BroadcastErasureChannel(FIG, make_rng(5))
    blk = BroadcastErasureChannel(FIG, make_rng(5))
    singles = [int(one.sample_state()) for _ in range(300)]
    assert singles == blk.sample_states(300).tolist()
    rng = make_rng(5)
    assert [int(sample_state(FIG, rng)) for _ in range(300)] == singles


def test_states_are_memoryless():
    s = BroadcastErasureChannel(FIG, make_rng(11)).sample_states(200_000)
    bob = (s & 1).astype(float)
    r = np.corrcoef(bob[:-1], bob[1:])[0, 1]
    assert abs(r) < 3 / math.sqrt(len(bob))


def test_apply_state():
    x = np.array([5, 6])
    assert apply_state(x, ChannelState.BC) == (x, x)
    assert apply_state(x, ChannelState.NONE) == (None, None)
    y1, y2 = apply_state(x, ChannelState.C)
    assert y1 is None and y2 is x


def test_state_parsing_and_acks():
    assert ChannelState.parse("BC") is ChannelState.BC
    assert ChannelState.parse("None") is ChannelState.NONE
    assert ChannelState.from_acks(True, False) is ChannelState.B
    assert ChannelState.C.calvin and not ChannelState.C.bob
    with pytest.raises(DomainError):
        ChannelState.parse("X")


def test_joint_distribution_validation():
    ChannelParams.from_joint((0.1, 0.2, 0.3, 0.4))
    with pytest.raises(DomainError):
        ChannelParams(0.5, 0.5, joint=(0.25, 0.25, 0.25, 0.3))
    with pytest.raises(DomainError):
        ChannelParams(0.9, 0.5, joint=(0.25, 0.25, 0.25, 0.25))
    with pytest.raises(DomainError):
        ChannelParams(1.2, 0.5)


def test_correlated_joint_is_sampled():
    p = ChannelParams.from_joint((0.0, 0.0, 0.5, 0.5))
    s = BroadcastErasureChannel(p, make_rng(1)).sample_states(10_000)
    assert set(np.unique(s).tolist()) <= {0, 3}


def test_scripted_channel_runs_out():
    ch = ScriptedChannel([ChannelState.B, ChannelState.C])
    assert ch.sample_states(2).tolist() == [1, 2]
    with pytest.raises(DomainError):
        ch.sample_state()
