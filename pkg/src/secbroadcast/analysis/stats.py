"""Batch statistics: measured rates, error frequencies and concentration of M_B^C."""

from dataclasses import dataclass
import math

import numpy as np

from ..channel import BroadcastErasureChannel, ChannelParams, make_rng
from ..errors import DomainError
from ..protocol.params import compute_params
from ..protocol.session import run_session
from .leakage import leakage_bound


@dataclass(frozen=True)
class SessionSummary:
    """The per-session numbers a batch report needs, without the packet payloads."""

    index: int
    length: int
    err_bob: str
    err_calvin: str
    bob_ok: bool
    calvin_ok: bool
    m_bc: int
    m_cb: int
    leak_to_calvin: float
    leak_to_bob: float
    params: object
    L: int
    q: int

    @classmethod
    def of(cls, tr):
        p = tr.params
        return cls(
            index=tr.index, length=len(tr), err_bob=tr.err_bob, err_calvin=tr.err_calvin,
            bob_ok=tr.bob_ok, calvin_ok=tr.calvin_ok, m_bc=tr.observed_count("calvin"),
            m_cb=tr.observed_count("bob"), leak_to_calvin=leakage_bound(tr),
            leak_to_bob=max(0, tr.observed_count("bob") - p.kC) * tr.L * math.log2(tr.q),
            params=p, L=tr.L, q=tr.q)


def run_batch(config, count, start=0):
    """Summaries of sessions ``start .. start+count-1`` under ``config``."""
    if count <= 0:
        raise DomainError("a batch needs at least one session")
    return [SessionSummary.of(run_session(config, i)) for i in range(start, start + count)]


@dataclass(frozen=True)
class RateReport:
    R1: float
    R2: float
    err_bob: float
    err_calvin: float
    sessions: int
    mean_length: float

    def as_dict(self):
        return dict(self.__dict__)


def empirical_rates(batch):
    """Rates ``N_i * L * log2(q) / n`` and per-user error frequencies of a batch."""
    batch = list(batch)
    if not batch:
        raise DomainError("empty batch")
    first = batch[0]
    key = (first.params, first.L, first.q)
    if any((b.params, b.L, b.q) != key for b in batch):
        raise DomainError("all sessions of a batch must share one configuration")
    p = first.params
    unit = first.L * math.log2(first.q)
    size = len(batch)
    return RateReport(
        R1=p.N1 * unit / p.n, R2=p.N2 * unit / p.n,
        err_bob=sum(b.err_bob is not None for b in batch) / size,
        err_calvin=sum(b.err_calvin is not None for b in batch) / size,
        sessions=size, mean_length=sum(_length(b) for b in batch) / size)


def _length(b):
    return b.length if hasattr(b, "length") else len(b)


def observation_probability(delta1, delta2):
    """Chance that Calvin hears a given encrypted Bob packet before anyone acknowledges it."""
    return (1 - delta2) / (1 - delta1 * delta2)


@dataclass(frozen=True)
class ConcentrationResult:
    N1: int
    kB: int
    trials: int
    exceed: int
    mean_m: float
    p_observe: float

    @property
    def p_hat(self):
        return self.exceed / self.trials

    @property
    def stderr(self):
        p = self.p_hat
        return math.sqrt(max(p * (1 - p), 1 / self.trials) / self.trials)


def simulate_observations(N1, delta1, delta2, trials, rng):
    """``M_B^C`` per trial: each packet is resent until someone hears it.

    Draws real channel states; Calvin observes the packet iff the first
    non-empty state includes him.
    """
    chan = BroadcastErasureChannel(ChannelParams(delta1, delta2), rng)
    active = np.arange(N1 * trials)
    seen = np.zeros(N1 * trials, dtype=bool)
    while active.size:
        s = chan.sample_states(active.size)
        done = s != 0
        seen[active[done]] = (s[done] & 2) != 0
        active = active[~done]
    return seen.reshape(trials, N1).sum(axis=1)


def concentration_check(N1, delta1, delta2, trials=1000, seed=0):
    """Empirical ``P(M_B^C > kB)`` with ``kB`` from the protocol parameters."""
    if trials < 100:
        raise DomainError("concentration_check needs at least 100 trials")
    kB = compute_params(N1, 0, delta1, delta2).kB
    m = simulate_observations(N1, delta1, delta2, trials, make_rng(seed, N1, 7))
    return ConcentrationResult(N1=N1, kB=kB, trials=trials, exceed=int((m > kB).sum()),
                               mean_m=float(m.mean()),
                               p_observe=observation_probability(delta1, delta2))
