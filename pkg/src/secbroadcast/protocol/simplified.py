"""Small illustrative version of the protocol with per-packet keys.

Keys are single key-generation packets heard by exactly one receiver.  A
key is used as a one-time pad until the other receiver hears a packet
padded with it, and is then retired.  Packets are tracked symbolically
as sets of symbol names over GF(2) (``⊕`` is symmetric difference) and
also evaluated over a binary field so they can be written as a trace.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np

from ..channel import ChannelState, make_rng
from ..errors import DomainError
from ..field import get_field
from .scheduler import KEYGEN, TO_BOB, TO_BOTH, TO_CALVIN

_XOR = "⊕"


def w_name(user, j):
    return f"W_{{{user},{j}}}"


def k_name(user, j):
    return f"K_{{{'B' if user == 1 else 'C'},{j}}}"


def _symbol_key(name):
    # W before K, then user, then index
    kind = 0 if name[0] == "W" else 1
    inner = name[3:-1].split(",")
    return kind, inner[0], int(inner[1])


def render(symbols):
    return _XOR.join(sorted(symbols, key=_symbol_key))


@dataclass
class SimplifiedTranscript:
    states: list
    phase: list
    exprs: list
    symbolic: list
    x: np.ndarray
    q: int
    L: int
    seed: int
    N1: int
    N2: int
    bob_keys: list = dc_field(default_factory=list)
    calvin_keys: list = dc_field(default_factory=list)
    bob_decoded: list = dc_field(default_factory=list)
    calvin_decoded: list = dc_field(default_factory=list)
    complete: bool = True

    def __len__(self):
        return len(self.states)

    @property
    def alice_sends(self):
        """Table-style lines, e.g. ``X_11=X_10`` or ``X_3 random``."""
        out = []
        for i, e in enumerate(self.exprs, 1):
            out.append(f"X_{i} {e}" if e == "random" else f"X_{i}={e}")
        return out

    @property
    def s_true(self):
        return np.array([int(s) for s in self.states], dtype=np.int8)

    s_reported = s_true


class _Knowledge:
    """GF(2) span of symbolic packets a receiver holds, as bitmasks."""

    def __init__(self):
        self.index = {}
        self.basis = {}  # leading bit -> row

    def _mask(self, symbols):
        m = 0
        for s in symbols:
            if s not in self.index:
                self.index[s] = len(self.index)
            m |= 1 << self.index[s]
        return m

    def _reduce(self, m):
        while m:
            top = m.bit_length() - 1
            row = self.basis.get(top)
            if row is None:
                return m
            m ^= row
        return 0

    def add(self, symbols):
        m = self._reduce(self._mask(symbols))
        if m:
            self.basis[m.bit_length() - 1] = m

    def knows(self, symbol):
        return self._reduce(self._mask([symbol])) == 0


def run_simplified_session(forced_states, W1, W2, *, key_sizes, q=256, L=1, seed=0):
    """Run the illustrative protocol on a forced state sequence.

    ``W1`` and ``W2`` give the message sizes (an int or a sequence whose
    length is used); ``key_sizes`` is the number of keys to collect for
    Bob and Calvin.  Receivers are honest, so reported states equal the
    forced ones.  Running out of states gives ``complete=False``.
    """
    n1 = W1 if isinstance(W1, int) else len(W1)
    n2 = W2 if isinstance(W2, int) else len(W2)
    want_b, want_c = key_sizes if n1 or n2 else (0, 0)
    want_b = want_b if n1 else 0
    want_c = want_c if n2 else 0
    if min(n1, n2, want_b, want_c) < 0:
        raise DomainError("sizes must be nonnegative")
    if (n1 and not want_b) or (n2 and not want_c):
        raise DomainError("a nonempty message needs at least one key")
    f = get_field(q)
    if not f.char2:
        raise DomainError("the simplified mode needs a binary field")
    states = [ChannelState.parse(s) if isinstance(s, str) else ChannelState(s)
              for s in forced_states]

    sent_states, phases, exprs, symbolic = [], [], [], []
    bob_keys, calvin_keys = [], []
    know = {1: _Knowledge(), 2: _Knowledge()}
    decoded = {1: [], 2: []}

    def emit(phase, symbols, expr):
        if len(symbolic) >= len(states):
            raise _Exhausted
        s = states[len(symbolic)]
        sent_states.append(s)
        phases.append(phase)
        exprs.append(expr)
        symbolic.append(frozenset(symbols))
        for user, got in ((1, s.bob), (2, s.calvin)):
            if got:
                know[user].add(symbols)
                size = n1 if user == 1 else n2
                for j in range(1, size + 1):
                    name = w_name(user, j)
                    if name not in decoded[user] and know[user].knows(name):
                        decoded[user].append(name)
        return s

    complete = True
    try:
        # key generation: exclusive receptions become keys
        while len(bob_keys) < want_b or len(calvin_keys) < want_c:
            i = len(symbolic) + 1
            if len(symbolic) >= len(states):
                raise _Exhausted
            s = states[len(symbolic)]
            if s == ChannelState.B and len(bob_keys) < want_b:
                bob_keys.append(i)
                sym = {k_name(1, len(bob_keys))}
            elif s == ChannelState.C and len(calvin_keys) < want_c:
                calvin_keys.append(i)
                sym = {k_name(2, len(calvin_keys))}
            else:
                sym = {f"R_{i}"}
            emit(KEYGEN, sym, "random")

        pending = {1: [], 2: []}
        for user, size, keys, phase in ((1, n1, bob_keys, TO_BOB), (2, n2, calvin_keys, TO_CALVIN)):
            key = 0
            for j in range(1, size + 1):
                if key >= len(keys):
                    raise _Exhausted
                sym = {w_name(user, j), k_name(user, key + 1)}
                expr = render(sym)
                while True:
                    s = emit(phase, sym, expr)
                    if s != ChannelState.NONE:
                        break
                    expr = f"X_{len(symbolic)}"
                mine = s.bob if user == 1 else s.calvin
                other = s.calvin if user == 1 else s.bob
                if other:
                    key += 1
                    if not mine:
                        pending[user].append((sym, len(symbolic)))

        # both: code the heads of the two pending lists, then finish one pure
        pb, pc = pending[1], pending[2]
        prev = None
        while pb or pc:
            if pb and pc:
                sym = pb[0][0] ^ pc[0][0]
                expr = f"X_{pb[0][1]}{_XOR}X_{pc[0][1]}"
            else:
                sym, ref = (pb or pc)[0]
                expr = f"X_{ref}"
            if prev is not None and prev[0] == sym:
                expr = f"X_{prev[1]}"
            s = emit(TO_BOTH, sym, expr)
            prev = (sym, len(symbolic))
            if pb and s.bob:
                pb.pop(0)
            if pc and s.calvin:
                pc.pop(0)
    except _Exhausted:
        complete = False

    rng = make_rng(seed, 0, 0)
    values = {}
    x = np.zeros((L, len(symbolic)), dtype=np.int64)
    for i, syms in enumerate(symbolic):
        acc = np.zeros(L, dtype=np.int64)
        for s in sorted(syms, key=lambda t: (t[0] != "R", t)):
            if s not in values:
                values[s] = f.random(rng, (L,))
            acc ^= values[s]
        x[:, i] = acc
    return SimplifiedTranscript(
        states=sent_states, phase=phases, exprs=exprs, symbolic=symbolic, x=x, q=q, L=L,
        seed=seed, N1=n1, N2=n2, bob_keys=bob_keys, calvin_keys=calvin_keys,
        bob_decoded=decoded[1], calvin_decoded=decoded[2], complete=complete)


class _Exhausted(Exception):
    pass
