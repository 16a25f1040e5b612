"""Leakage toward the eavesdropping receiver: the counting bound and exact oracles.

The exact oracle enumerates every outcome of a tiny experiment with
rational probabilities and computes ``I(secret; view)`` in bits.  When
the secret is uniform on ``2^a`` values and every posterior is uniform
on ``2^b`` values (always the case for linear schemes over GF(2)), the
result is an exact :class:`~fractions.Fraction`; otherwise a float.
"""

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
import itertools
import math

import numpy as np

from ..channel import ChannelParams
from ..errors import DomainError, EnumerationBudgetError
from ..field import get_field
from ..mds import derive_key, rs_parity_check
from .regions import capacity_unit, exact

ENUMERATION_BUDGET = 10 ** 8


def leakage_bound(transcript, kB=None, L=None, q=None):
    """``max(0, M_B^C - kB) * L * log2(q)`` for one transcript, in bits.

    ``M_B^C`` counts the distinct encrypted Bob packets Calvin truly heard,
    pure or inside a coded packet.
    """
    kB = transcript.params.kB if kB is None else kB
    L = transcript.L if L is None else L
    q = transcript.q if q is None else q
    m = transcript.observed_count("calvin")
    return max(0, m - kB) * L * math.log2(q)


def _log2_exact(x):
    """``log2(x)`` as an int when ``x`` is a power of two (int or 1/int), else None."""
    x = Fraction(x)
    for v in (x, 1 / x):
        if v.denominator == 1 and v.numerator & (v.numerator - 1) == 0:
            e = v.numerator.bit_length() - 1
            return e if v is x else -e
    return None


def _entropy(probs):
    """Entropy in bits of a distribution given by Fractions summing to one."""
    probs = [p for p in probs if p]
    exact_terms = [_log2_exact(p) for p in probs]
    if all(t is not None for t in exact_terms):
        return -sum(p * t for p, t in zip(probs, exact_terms))
    return -sum(float(p) * math.log2(p) for p in probs)


def mutual_information(joint):
    """``I(S; V)`` for ``joint[(s, v)] = P(s, v)`` with Fraction probabilities."""
    total = sum(joint.values())
    if total == 0:
        raise DomainError("empty distribution")
    ps = defaultdict(Fraction)
    pv = defaultdict(Fraction)
    for (s, v), p in joint.items():
        ps[s] += p / total
        pv[v] += p / total
    # I = H(S) - sum_v P(v) H(S | V = v)
    cond = defaultdict(list)
    for (s, v), p in joint.items():
        if p:
            cond[v].append(p / total / pv[v])
    h = _entropy(ps.values())
    for v, post in cond.items():
        h -= pv[v] * _entropy(post)
    if isinstance(h, Fraction):
        return h
    return max(0.0, float(h))


@dataclass(frozen=True)
class LeakageResult:
    bits: object
    size: int
    label: str = ""

    @property
    def exact(self):
        return isinstance(self.bits, (Fraction, int))

    def __str__(self):
        if self.exact:
            return f"{Fraction(self.bits)} bits"
        return f"{self.bits:.12g} bits"


def exact_leakage(ensemble, budget=ENUMERATION_BUDGET):
    """Enumerate ``ensemble`` and return ``I(secret; view)`` as a :class:`LeakageResult`.

    ``ensemble`` provides ``size`` and ``outcomes()`` yielding
    ``(probability, secret, view)``.  Refuses before enumerating when the
    size exceeds ``budget``.
    """
    if ensemble.size > budget:
        raise EnumerationBudgetError(ensemble.size, budget)
    joint = defaultdict(Fraction)
    for p, s, v in ensemble.outcomes():
        joint[(s, v)] += p
    return LeakageResult(mutual_information(joint), ensemble.size, ensemble.label)


def _state_probs(delta1, delta2):
    d1, d2 = exact(delta1), exact(delta2)
    # codes NONE, B, C, BC
    return {0: d1 * d2, 1: (1 - d1) * d2, 2: d1 * (1 - d2), 3: (1 - d1) * (1 - d2)}


class PlaintextEnsemble:
    """One uniform message bit sent once in the clear."""

    label = "plaintext"

    def __init__(self, delta1, delta2):
        self.probs = _state_probs(delta1, delta2)

    @property
    def size(self):
        return 2 * 4

    def outcomes(self):
        for w in (0, 1):
            for s, ps in self.probs.items():
                y = w if s & 2 else None
                yield Fraction(1, 2) * ps, w, (s, y)


class OneTimePadEnsemble:
    """One uniform bit padded with a uniform key bit the eavesdropper never sees."""

    label = "otp"

    def __init__(self, delta1, delta2):
        self.probs = _state_probs(delta1, delta2)

    @property
    def size(self):
        return 2 * 2 * 4

    def outcomes(self):
        for w in (0, 1):
            for k in (0, 1):
                for s, ps in self.probs.items():
                    y = w ^ k if s & 2 else None
                    yield Fraction(1, 4) * ps, w, (s, y)


class KeygenEnsemble:
    """Key distilled from ``k1`` uniform packets, eavesdropper sees rows ``observed``.

    The secret is ``K_B = X G`` for the public parity-check matrix ``G``;
    the view is ``X`` restricted to ``observed``.
    """

    label = "keygen"

    def __init__(self, k1, kB, q, observed, L=1):
        self.k1, self.kB, self.q, self.L = k1, kB, q, L
        self.observed = tuple(sorted(observed))
        self.parity = rs_parity_check(k1, kB, q)

    @property
    def size(self):
        return self.q ** (self.L * self.k1)

    def outcomes(self):
        p = Fraction(1, self.size)
        for flat in itertools.product(range(self.q), repeat=self.L * self.k1):
            x = np.array(flat, dtype=np.int64).reshape(self.L, self.k1)
            key = derive_key(x, self.parity)
            yield p, key.tobytes(), x[:, list(self.observed)].tobytes()


def key_leak_by_rank(k1, kB, q, observed, L=1):
    """``(kB - rank(G restricted to unobserved rows)) * L * log2(q)``: the linear-algebra route."""
    f = get_field(q)
    g = rs_parity_check(k1, kB, q).to_array()
    hidden = [r for r in range(k1) if r not in set(observed)]
    rank = f.rank(g[hidden]) if hidden else 0
    return (kB - rank) * capacity_unit(L, q)


# -- the tiny full-protocol instance -----------------------------------------

def tiny_params():
    """Smallest instance exercising every step: one Bob packet, one key packet from two."""
    from ..protocol.params import ProtocolParams

    return ProtocolParams(N1=1, N2=0, kB=1, kC=0, k1=2, k2=0, n1=3, n2=2, n3=0, n4=1,
                          delta1=0.5, delta2=0.5)


@dataclass
class TinyOutcome:
    prob: Fraction
    w1: tuple
    view: tuple
    keygen_view: tuple
    key: object
    bound_bits: float
    protected: bool


class TinyProtocolEnsemble:
    """Every (states, Alice's packets, W1) outcome of a tiny honest run of the engine.

    The view is what Calvin holds: the states of the used transmissions
    and his channel outputs.  ``protected`` marks outcomes where Calvin
    missed at least ``kB`` of Bob's key packets and heard at most ``kB``
    encrypted Bob packets.
    """

    label = "tiny-protocol"

    def __init__(self, params=None, q=2, L=1):
        from ..protocol.session import SessionConfig

        self.params = params or tiny_params()
        p = self.params
        self.q, self.L = q, L
        self.cfg = SessionConfig(p, ChannelParams(p.delta1, p.delta2), L=L, q=q)
        self.probs = _state_probs(p.delta1, p.delta2)

    @property
    def size(self):
        p = self.params
        return 4 ** p.n * self.q ** (self.L * (p.N1 + p.N2 + p.n1))

    def _values(self, count):
        return [np.array(v, dtype=np.int64).reshape(self.L, count)
                for v in itertools.product(range(self.q), repeat=self.L * count)]

    def runs(self):
        from ..protocol.session import Session

        p = self.params
        pw = Fraction(1, self.q ** (self.L * (p.N1 + p.N2 + p.n1)))
        messages = self._values(p.N1)
        w2s = self._values(p.N2)
        packets = self._values(p.n1)
        for states in itertools.product(range(4), repeat=p.n):
            ps = math.prod((self.probs[s] for s in states), start=Fraction(1))
            if ps == 0:
                continue
            for w1 in messages:
                for w2 in w2s:
                    for xk in packets:
                        sess = Session(self.cfg, 0, states=states, keygen_packets=xk, w1=w1, w2=w2)
                        tr, sched = sess._drive()
                        yield ps * pw, tr, sched, xk

    def outcomes(self):
        for o in self.detailed():
            yield o.prob, o.w1, o.view

    def detailed(self):
        p = self.params
        for prob, tr, sched, xk in self.runs():
            got = tr.calvin_received
            y2 = tuple(tuple(tr.x[:, i]) if got[i] else None for i in range(len(tr)))
            view = (tuple(int(s) for s in tr.s_true), y2, tuple(tr.w2.ravel()))
            kg = min(p.n1, len(tr))
            keygen_view = (tuple(int(s) for s in tr.s_true[:kg]), y2[:kg])
            pos = sched.bob_keygen
            if len(pos) >= p.k1:
                parity = rs_parity_check(p.k1, p.kB, self.q)
                key = tuple(derive_key(xk[:, pos[:p.k1]], parity).ravel())
            else:
                key = None  # keygen error: no key, nothing about W1 is sent
            missed = sum(1 for i in pos[:p.k1] if not got[i])
            m = tr.observed_count("calvin")
            yield TinyOutcome(
                prob=prob, w1=tuple(tr.w1.ravel()), view=view, keygen_view=keygen_view, key=key,
                bound_bits=leakage_bound(tr), protected=missed >= p.kB and m <= p.kB)


@dataclass(frozen=True)
class TinyReport:
    leakage: object
    protected_leakage: object
    protected_mass: Fraction
    counting_term: object
    key_term: object
    keyed_mass: Fraction
    size: int

    @property
    def bound(self):
        """Expected counting term plus the key term weighted by the no-keygen-error mass."""
        return self.counting_term + self.keyed_mass * self.key_term


def analyze_tiny(ensemble=None, budget=ENUMERATION_BUDGET):
    """Exact leakage overall and on the protected sub-ensemble, plus both bound terms.

    The key term is ``I(K_B; keygen view)`` given no key-generation error
    for Bob; when Bob errs nothing about ``W1`` is transmitted.
    """
    ens = ensemble or TinyProtocolEnsemble()
    if ens.size > budget:
        raise EnumerationBudgetError(ens.size, budget)
    joint = defaultdict(Fraction)
    prot = defaultdict(Fraction)
    keyj = defaultdict(Fraction)
    mass = Fraction(0)
    keyed = Fraction(0)
    counting = Fraction(0)
    exact_bound = True
    for o in ens.detailed():
        joint[(o.w1, o.view)] += o.prob
        if o.key is not None:
            keyj[(o.key, o.keygen_view)] += o.prob
            keyed += o.prob
        b = Fraction(o.bound_bits).limit_denominator(1) if float(o.bound_bits).is_integer() else None
        if b is None:
            exact_bound = False
            counting += Fraction(o.bound_bits) * o.prob
        else:
            counting += b * o.prob
        if o.protected:
            prot[(o.w1, o.view)] += o.prob
            mass += o.prob
    prot_leak = mutual_information(prot) if mass else Fraction(0)
    return TinyReport(
        leakage=mutual_information(joint), protected_leakage=prot_leak, protected_mass=mass,
        counting_term=counting if exact_bound else float(counting),
        key_term=mutual_information(keyj) if keyed else Fraction(0), keyed_mass=keyed,
        size=ens.size)


ENSEMBLES = {
    "plaintext": PlaintextEnsemble,
    "otp": OneTimePadEnsemble,
}
