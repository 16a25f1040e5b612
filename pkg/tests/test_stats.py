import math

import pytest

from secbroadcast.analysis.regions import region_contains, secrecy_region
from secbroadcast.analysis.stats import (concentration_check, empirical_rates,
                                         observation_probability, run_batch,
                                         simulate_observations)
from secbroadcast.channel import make_rng
from secbroadcast.errors import DomainError
from secbroadcast.protocol.session import SessionConfig


def test_observation_probability_value():
    assert observation_probability(0.7, 0.6) == pytest.approx(20 / 29, abs=1e-15)
    assert observation_probability(0.7, 1.0) == 0


def test_simulated_observations_match_probability():
    m = simulate_observations(200, 0.7, 0.6, 500, make_rng(1))
    p = 20 / 29
    assert abs(m.mean() / 200 - p) < 3 * math.sqrt(p * (1 - p) / (200 * 500))


def test_deaf_eavesdropper_observes_nothing():
    m = simulate_observations(300, 0.7, 1.0, 100, make_rng(2))
    assert not m.any()


def test_exceedance_nonincreasing():
    rs = [concentration_check(n, 0.7, 0.6, trials=1000, seed=3) for n in (100, 400, 1600)]
    for a, b in zip(rs, rs[1:]):
        assert b.p_hat <= a.p_hat + 3 * math.hypot(a.stderr, b.stderr)
    assert all(r.kB > r.mean_m for r in rs)


def test_concentration_needs_trials():
    with pytest.raises(DomainError):
        concentration_check(100, 0.7, 0.6, trials=10)


@pytest.fixture(scope="module")
def batch_cfg():
    return SessionConfig.build(400, 400, 0.7, 0.6, q=4096, seed=2)


def test_rates_closed_form(batch_cfg):
    batch = run_batch(batch_cfg, 20)
    r = empirical_rates(batch)
    p = batch_cfg.params
    assert r.R1 == p.N1 * 12 / p.n and r.R2 == p.N2 * 12 / p.n
    assert region_contains(secrecy_region(0.7, 0.6, 1, 4096), (r.R1, r.R2))


def test_disjoint_seed_ranges_agree(batch_cfg):
    a = empirical_rates(run_batch(batch_cfg, 60, start=0))
    b = empirical_rates(run_batch(batch_cfg, 60, start=60))
    assert (a.R1, a.R2) == (b.R1, b.R2)
    for x, y in ((a.err_bob, b.err_bob), (a.err_calvin, b.err_calvin)):
        p = (x + y) / 2
        assert abs(x - y) <= 3 * math.sqrt(max(p * (1 - p), 1 / 60) * 2 / 60)


def test_empty_batch_rejected(batch_cfg):
    with pytest.raises(DomainError):
        run_batch(batch_cfg, 0)
    with pytest.raises(DomainError):
        empirical_rates([])
