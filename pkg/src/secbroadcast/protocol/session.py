"""One run of the two-phase protocol: keys, encryption, delivery, decoding."""

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from ..adversary import Behavior, BehaviorInput, Honest
from ..channel import (BroadcastErasureChannel, ChannelParams, ChannelState, ScriptedChannel,
                       make_rng)
from ..errors import ConfigError, DomainError
from ..field import DEFAULT_Q, get_field
from ..mds import derive_key, expand_key, rs_generator, rs_parity_check
from .params import ProtocolParams, compute_params
from .scheduler import KEY, KEYGEN, UB, UC, Scheduler

# independent random streams of a session, keyed (seed, session index, role)
STREAM_CHANNEL, STREAM_ALICE, STREAM_MESSAGES, STREAM_BOB, STREAM_CALVIN = range(5)


@dataclass(frozen=True)
class SessionConfig:
    params: ProtocolParams
    channel: ChannelParams
    L: int = 1
    q: int = DEFAULT_Q
    seed: int = 0
    bob: Behavior = Honest()
    calvin: Behavior = Honest()

    def __post_init__(self):
        if self.L <= 0:
            raise ConfigError("packet length L must be positive")
        get_field(self.q)
        p = self.params
        need = max(p.k1, p.k2, p.N1, p.N2)
        if self.q < need:
            raise ConfigError(
                f"q={self.q} is too small for the MDS constructions; need q >= {need}")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")

    @classmethod
    def build(cls, N1, N2, delta1, delta2, **kwargs):
        params = compute_params(N1, N2, delta1, delta2)
        return cls(params, ChannelParams(delta1, delta2), **kwargs)

    @property
    def field(self):
        return get_field(self.q)


@dataclass
class KeyMaterial:
    """Shared keys; entries are ``None`` for a receiver in key-generation error."""

    KB: Optional[np.ndarray] = None
    KC: Optional[np.ndarray] = None
    KBexp: Optional[np.ndarray] = None
    KCexp: Optional[np.ndarray] = None
    # key-generation packets each key was distilled from
    KBsrc: Optional[np.ndarray] = None
    KCsrc: Optional[np.ndarray] = None

    def expanded_from(self, which, received):
        """Expanded key if it was distilled from exactly ``received``, else None."""
        src, exp = (self.KBsrc, self.KBexp) if which == "bob" else (self.KCsrc, self.KCexp)
        if src is not None and src.shape == received.shape and np.array_equal(src, received):
            return exp
        return None


def make_keys(params, q, keygen_packets, positions, which):
    """Distil and expand one receiver's key from its acknowledged packets."""
    if which == "bob":
        k, kk, n = params.k1, params.kB, params.N1
    else:
        k, kk, n = params.k2, params.kC, params.N2
    received = keygen_packets[:, positions[:k]]
    key = derive_key(received, rs_parity_check(k, kk, q))
    return key, expand_key(key, rs_generator(n, kk, q))


def encrypt_messages(field, w1, w2, keys):
    """One-time pads: ``U_B = W1 + K'_B`` and ``U_C = W2 + K'_C`` columnwise."""
    out = []
    for w, k in ((w1, keys.KBexp), (w2, keys.KCexp)):
        if w is None or k is None:
            out.append(None)
            continue
        if np.shape(w) != np.shape(k):
            raise DomainError(f"message shape {np.shape(w)} does not match key {np.shape(k)}")
        out.append(field.add(w, k))
    return tuple(out)


@dataclass
class SessionTranscript:
    """Complete record of one run.

    ``x`` is the ``(L, T)`` matrix of transmitted packets; ``s_true`` and
    ``s_reported`` hold :class:`ChannelState` codes.  ``phase``, ``kind``,
    ``ub`` and ``uc`` describe what each transmission carried (``-1`` for
    none), all derivable from ``s_reported`` alone.
    """

    params: ProtocolParams
    q: int
    L: int
    seed: int
    index: int
    x: np.ndarray
    s_true: np.ndarray
    s_reported: np.ndarray
    phase: np.ndarray
    kind: np.ndarray
    ub: np.ndarray
    uc: np.ndarray
    phase_marks: dict
    err_bob: Optional[str]
    err_calvin: Optional[str]
    w1: np.ndarray
    w2: np.ndarray
    decoded_w1: Optional[np.ndarray] = None
    decoded_w2: Optional[np.ndarray] = None
    keys: KeyMaterial = dc_field(default_factory=KeyMaterial, repr=False)

    def __len__(self):
        return len(self.s_true)

    @property
    def field(self):
        return get_field(self.q)

    @property
    def bob_received(self):
        return (self.s_true & 1) != 0

    @property
    def calvin_received(self):
        return (self.s_true & 2) != 0

    def _outputs(self, mask):
        return [self.x[:, i] if m else None for i, m in enumerate(mask)]

    @property
    def y1(self):
        return self._outputs(self.bob_received)

    @property
    def y2(self):
        return self._outputs(self.calvin_received)

    @property
    def bob_ok(self):
        return self.decoded_w1 is not None and np.array_equal(self.decoded_w1, self.w1)

    @property
    def calvin_ok(self):
        return self.decoded_w2 is not None and np.array_equal(self.decoded_w2, self.w2)

    def observed_count(self, observer):
        """Distinct encrypted packets of the *other* receiver that ``observer`` truly saw.

        Pure and coded observations both count.
        """
        if observer == "calvin":
            mask = self.calvin_received & (self.ub >= 0)
            return int(np.unique(self.ub[mask]).size)
        mask = self.bob_received & (self.uc >= 0)
        return int(np.unique(self.uc[mask]).size)


class Session:
    """Runs the protocol for one configuration and session index.

    ``states``, ``keygen_packets``, ``w1`` and ``w2`` override the random
    draws (forced channel states, Alice's randomness, messages).
    """

    def __init__(self, config, index=0, *, states=None, keygen_packets=None, w1=None, w2=None):
        self.cfg = config
        self.index = index
        p = config.params
        f = config.field
        self.field = f
        seed = config.seed
        if states is not None:
            self.channel = ScriptedChannel(states)
        else:
            self.channel = BroadcastErasureChannel(config.channel,
                                                   make_rng(seed, index, STREAM_CHANNEL))
        shape = (config.L, p.n1)
        if keygen_packets is None:
            keygen_packets = f.random(make_rng(seed, index, STREAM_ALICE), shape)
        self.keygen_packets = np.asarray(keygen_packets, dtype=np.int64).reshape(shape)
        msg_rng = make_rng(seed, index, STREAM_MESSAGES)
        self.w1 = self._message(w1, p.N1, msg_rng)
        self.w2 = self._message(w2, p.N2, msg_rng)
        self.bob_rng = make_rng(seed, index, STREAM_BOB)
        self.calvin_rng = make_rng(seed, index, STREAM_CALVIN)
        self.keys = KeyMaterial()
        self.u_b = self.u_c = None
        self._keys_ready = False

    def _message(self, w, count, rng):
        shape = (self.cfg.L, count)
        if w is None:
            return self.field.random(rng, shape)
        w = np.asarray(self.field._check(w), dtype=np.int64)
        if w.shape != shape:
            raise DomainError(f"message shape {w.shape}, expected {shape}")
        return w

    # -- phases ------------------------------------------------------------

    def _setup_keys(self, sched):
        p, q = self.cfg.params, self.cfg.q
        if sched.err_bob is None and p.N1 > 0:
            self.keys.KB, self.keys.KBexp = make_keys(p, q, self.keygen_packets,
                                                      sched.bob_keygen, "bob")
            self.keys.KBsrc = self.keygen_packets[:, sched.bob_keygen[:p.k1]]
        if sched.err_calvin is None and p.N2 > 0:
            self.keys.KC, self.keys.KCexp = make_keys(p, q, self.keygen_packets,
                                                      sched.calvin_keygen, "calvin")
            self.keys.KCsrc = self.keygen_packets[:, sched.calvin_keygen[:p.k2]]
        self.u_b, self.u_c = encrypt_messages(self.field, self.w1, self.w2, self.keys)
        self._keys_ready = True

    def _content(self, kind, pos, ub, uc):
        if kind == KEY:
            return self.keygen_packets[:, pos]
        if kind == UB:
            return self.u_b[:, ub]
        if kind == UC:
            return self.u_c[:, uc]
        return self.field.add(self.u_b[:, ub], self.u_c[:, uc])

    def _drive(self, keygen_only=False):
        cfg, p = self.cfg, self.cfg.params
        n = p.n1 if keygen_only else p.n
        if isinstance(self.channel, ScriptedChannel):
            avail = min(n, len(self.channel))
        else:
            avail = n
        states = self.channel.sample_states(avail)
        if avail < n:
            # unused tail; running into it is an error below
            states = np.concatenate([states, np.zeros(n - avail, dtype=np.int8)])
        recv_b = (states & 1) != 0
        recv_c = (states & 2) != 0
        rep_b = cfg.bob.decide_block(recv_b, self.bob_rng)
        rep_c = cfg.calvin.decide_block(recv_c, self.calvin_rng)
        slow = rep_b is None or rep_c is None
        cols = np.full((4, n), -1, dtype=np.int32)
        sched = Scheduler(p)
        if slow:
            x = np.zeros((cfg.L, n), dtype=np.int64)
            rb = rep_b if rep_b is not None else np.zeros(n, dtype=bool)
            rc = rep_c if rep_c is not None else np.zeros(n, dtype=bool)
            packet = x.__getitem__
            vb = BehaviorInput("bob", recv_b, rb, rc, self.bob_rng, lambda i: packet((slice(None), i)))
            vc = BehaviorInput("calvin", recv_c, rc, rb, self.calvin_rng,
                               lambda i: packet((slice(None), i)))
        i = 0
        act = sched.next()
        while act is not None and i < n:
            if i >= avail:
                raise DomainError(f"forced state sequence ended after {avail} transmissions")
            cols[:, i] = act
            if act.phase != KEYGEN and not self._keys_ready:
                self._setup_keys(sched)
            if slow:
                x[:, i] = self._content(act.kind, i, act.ub, act.uc)
                vb.index = vc.index = i
                b = cfg.bob.decide(vb) if rep_b is None else rb[i]
                c = cfg.calvin.decide(vc) if rep_c is None else rc[i]
                rb[i], rc[i] = b, c
            sched.feedback(rep_b[i] if not slow else rb[i], rep_c[i] if not slow else rc[i])
            i += 1
            act = sched.next() if i < n or not keygen_only else None
        if slow:
            rep_b, rep_c = rb, rc
        if keygen_only:
            sched._finish_keygen()
        if not self._keys_ready and sched.keygen_finished:
            self._setup_keys(sched)
        T = i
        cols = cols[:, :T]
        if not slow:
            x = self._materialize(cols, T)
        else:
            x = x[:, :T]
        reported = (rep_b[:T].astype(np.int8) | (rep_c[:T].astype(np.int8) << 1))
        tr = SessionTranscript(
            params=p, q=cfg.q, L=cfg.L, seed=cfg.seed, index=self.index, x=x,
            s_true=states[:T].copy(), s_reported=reported, phase=cols[0].copy(),
            kind=cols[1].copy(), ub=cols[2].copy(), uc=cols[3].copy(),
            phase_marks=dict(sched.phase_marks), err_bob=sched.err_bob,
            err_calvin=sched.err_calvin, w1=self.w1, w2=self.w2, keys=self.keys)
        return tr, sched

    def _materialize(self, cols, T):
        f = self.field
        x = np.zeros((self.cfg.L, T), dtype=np.int64)
        phase, kind, ub, uc = cols
        key = kind == KEY
        x[:, key] = self.keygen_packets[:, np.flatnonzero(key)]
        has_ub = ub >= 0
        if has_ub.any():
            x[:, has_ub] = self.u_b[:, ub[has_ub]]
        has_uc = uc >= 0
        if has_uc.any():
            x[:, has_uc] = f.add(x[:, has_uc], self.u_c[:, uc[has_uc]])
        return x

    def run_keygen(self):
        """Steps 1-3 only: returns ``(keys, transcript)``; errors are transcript flags."""
        tr, _ = self._drive(keygen_only=True)
        return self.keys, tr

    def run(self):
        from .decode import decode

        tr, _ = self._drive()
        if tr.err_bob is None and tr.params.N1 > 0:
            tr.decoded_w1 = decode("bob", tr)
        elif tr.params.N1 == 0:
            tr.decoded_w1 = tr.w1.copy()
        if tr.err_calvin is None and tr.params.N2 > 0:
            tr.decoded_w2 = decode("calvin", tr)
        elif tr.params.N2 == 0:
            tr.decoded_w2 = tr.w2.copy()
        return tr


def run_keygen(config, index=0, **overrides):
    return Session(config, index, **overrides).run_keygen()


def run_session(config, index=0, **overrides):
    """Run one seeded session; protocol failures are transcript flags, not exceptions."""
    return Session(config, index, **overrides).run()


def state_codes(states):
    return np.array([int(ChannelState.parse(s) if isinstance(s, str) else ChannelState(s))
                     for s in states], dtype=np.int8)
