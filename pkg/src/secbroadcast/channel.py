"""Memoryless broadcast erasure channel with seeded, replayable state draws."""

from dataclasses import dataclass
import enum

import numpy as np

from .errors import DomainError

RNG_ALGORITHM = "numpy.Philox4x64-10/SeedSequence"
BLOCK = 4096


class ChannelState(enum.IntEnum):
    """Who received a transmission.  The integer code packs (bob, calvin) bits."""

    NONE = 0
    B = 1
    C = 2
    BC = 3

    @property
    def bob(self):
        return bool(self & 1)

    @property
    def calvin(self):
        return bool(self & 2)

    @classmethod
    def from_acks(cls, bob, calvin):
        return cls(int(bool(bob)) | int(bool(calvin)) << 1)

    @classmethod
    def parse(cls, text):
        key = text.strip().upper()
        if key in ("NONE", "∅", "-", ""):
            return cls.NONE
        try:
            return cls[key]
        except KeyError:
            raise DomainError(f"unknown channel state {text!r}") from None

    @property
    def tag(self):
        return "None" if self is ChannelState.NONE else self.name


# sampling order for cumulative thresholds
SAMPLE_ORDER = (ChannelState.B, ChannelState.C, ChannelState.BC, ChannelState.NONE)
_ORDER_CODES = np.array([int(s) for s in SAMPLE_ORDER], dtype=np.int8)

ERASED = None  # the erasure mark


@dataclass(frozen=True)
class ChannelParams:
    """Erasure probabilities ``delta1`` (Bob) and ``delta2`` (Calvin).

    ``joint`` optionally gives the state distribution in the order
    (B, C, BC, None) for correlated erasures; its marginals must agree with
    the deltas.
    """

    delta1: float
    delta2: float
    joint: tuple = None

    def __post_init__(self):
        for name in ("delta1", "delta2"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise DomainError(f"{name}={v} is not a probability")
        if self.joint is not None:
            joint = tuple(self.joint)
            if len(joint) != 4 or any(p < 0 for p in joint):
                raise DomainError("joint must be four nonnegative probabilities")
            if abs(sum(joint) - 1) > 1e-12:
                raise DomainError(f"joint sums to {sum(joint)}, not 1")
            p_b, p_c, p_bc, p_none = joint
            if abs((p_c + p_none) - self.delta1) > 1e-12 or abs((p_b + p_none) - self.delta2) > 1e-12:
                raise DomainError("joint marginals disagree with delta1/delta2")
            object.__setattr__(self, "joint", joint)

    @classmethod
    def from_joint(cls, joint):
        p_b, p_c, p_bc, p_none = joint
        return cls(p_c + p_none, p_b + p_none, tuple(joint))


def state_distribution(params):
    """Probabilities of (B, C, BC, None)."""
    if params.joint is not None:
        return params.joint
    d1, d2 = params.delta1, params.delta2
    return ((1 - d1) * d2, d1 * (1 - d2), (1 - d1) * (1 - d2), d1 * d2)


def _thresholds(params):
    cum = np.cumsum(np.array(state_distribution(params), dtype=np.float64))
    cum[-1] = np.inf  # rounding must never push a draw past the last state
    return cum


def make_rng(*key):
    """Philox stream keyed by integers, e.g. ``(master_seed, session, role)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(key))))


def apply_state(x, state):
    """Channel outputs ``(y1, y2)``; erased outputs are ``None``."""
    state = ChannelState(state)
    return (x if state.bob else ERASED, x if state.calvin else ERASED)


class BroadcastErasureChannel:
    """Samples i.i.d. states from its own random stream.

    Uniforms are drawn in blocks; the sequence of states is the same as
    drawing one uniform per call.
    """

    def __init__(self, params, rng):
        self.params = params
        self._rng = rng
        self._cum = _thresholds(params)
        self._buf = np.empty(0, dtype=np.int8)
        self._pos = 0

    def _encode(self, u):
        return _ORDER_CODES[np.searchsorted(self._cum, u, side="right")]

    def sample_states(self, count):
        out = np.empty(count, dtype=np.int8)
        have = min(count, len(self._buf) - self._pos)
        out[:have] = self._buf[self._pos:self._pos + have]
        self._pos += have
        if have < count:
            out[have:] = self._encode(self._rng.random(count - have))
        return out

    def sample_state(self):
        if self._pos >= len(self._buf):
            self._buf = self._encode(self._rng.random(BLOCK))
            self._pos = 0
        s = self._buf[self._pos]
        self._pos += 1
        return ChannelState(int(s))

    def transmit(self, x):
        s = self.sample_state()
        return (s,) + apply_state(x, s)


class ScriptedChannel:
    """Replays a fixed state sequence (golden traces, exhaustive enumeration)."""

    def __init__(self, states):
        self._states = np.array([int(ChannelState(s)) for s in states], dtype=np.int8)
        self._pos = 0

    def __len__(self):
        return len(self._states)

    def sample_states(self, count):
        end = self._pos + count
        if end > len(self._states):
            raise DomainError(f"scripted channel has {len(self._states) - self._pos} states left, "
                              f"{count} requested")
        out = self._states[self._pos:end].copy()
        self._pos = end
        return out

    def sample_state(self):
        return ChannelState(int(self.sample_states(1)[0]))

    def transmit(self, x):
        s = self.sample_state()
        return (s,) + apply_state(x, s)


def sample_state(params, rng):
    """One state drawn from ``rng`` (one uniform consumed)."""
    u = rng.random()
    return SAMPLE_ORDER[int(np.searchsorted(_thresholds(params), u, side="right"))]
