"""Receiver acknowledgment behaviors.

A behavior turns what a receiver knows at packet ``i`` into the ACK bit
it publishes.  It sees its own receptions up to and including ``i``, its
own past reports, and the other receiver's reports only up to ``i - 1``;
the view object simply has no accessor for the other's current ACK.

Built-in behaviors never look at history, so besides ``decide`` they
offer ``decide_block``, which the session engine uses to precompute a
whole run of ACKs.  Both paths consume the private random stream the same
way and give identical results.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError


class BehaviorInput:
    """Causal view of one receiver at transmission ``index``.

    The engine owns the backing arrays and advances ``index``; the
    other receiver's report for ``index`` is written only after both
    receivers have decided.
    """

    __slots__ = ("index", "role", "rng", "_recv", "_own_rep", "_other_rep", "_packet")

    def __init__(self, role, received, own_reported, other_reported, rng, packet=None):
        self.index = 0
        self.role = role
        self.rng = rng
        self._recv = received
        self._own_rep = own_reported
        self._other_rep = other_reported
        self._packet = packet

    @property
    def received(self):
        return bool(self._recv[self.index])

    @property
    def receptions(self):
        return self._recv[:self.index + 1]

    @property
    def own_reported(self):
        return self._own_rep[:self.index]

    @property
    def other_reported(self):
        return self._other_rep[:self.index]

    def observation(self, i):
        """Packet received at ``i <= index``, or ``None`` if erased."""
        if i > self.index:
            raise DomainError("observations are causal")
        if not self._recv[i] or self._packet is None:
            return None
        return self._packet(i)


class Behavior:
    kind = "custom"

    def decide(self, view):
        raise NotImplementedError

    def decide_block(self, received, rng):
        """Vectorized ``decide`` over a run of packets, or None if history-dependent."""
        return None

    def __str__(self):
        return self.kind


@dataclass(frozen=True)
class Honest(Behavior):
    kind = "honest"

    def decide(self, view):
        return view.received

    def decide_block(self, received, rng):
        return np.asarray(received, dtype=bool).copy()


@dataclass(frozen=True)
class AlwaysAck(Behavior):
    kind = "always_ack"

    def decide(self, view):
        return True

    def decide_block(self, received, rng):
        return np.ones(len(received), dtype=bool)


@dataclass(frozen=True)
class NeverAck(Behavior):
    kind = "never_ack"

    def decide(self, view):
        return False

    def decide_block(self, received, rng):
        return np.zeros(len(received), dtype=bool)


@dataclass(frozen=True)
class Flip(Behavior):
    """Reports the truth inverted with probability ``p``; one uniform per packet."""

    p: float = 0.5
    kind = "flip"

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise DomainError(f"flip probability {self.p} outside [0, 1]")

    def decide(self, view):
        return view.received ^ bool(view.rng.random() < self.p)

    def decide_block(self, received, rng):
        return np.asarray(received, dtype=bool) ^ (rng.random(len(received)) < self.p)

    def __str__(self):
        return f"flip:{self.p:g}"


@dataclass(frozen=True)
class Scripted(Behavior):
    """Replays a fixed ACK sequence, consumed by transmission index."""

    bits: tuple
    kind = "custom"
    source: str = None

    def _get(self, i):
        if i >= len(self.bits):
            raise DomainError(f"ACK script has {len(self.bits)} entries, index {i} requested")
        return self.bits[i]

    def decide(self, view):
        return bool(self._get(view.index))

    def decide_block(self, received, rng):
        if len(received) > len(self.bits):
            raise DomainError(
                f"ACK script has {len(self.bits)} entries, {len(received)} needed")
        return np.array(self.bits[:len(received)], dtype=bool)

    def __str__(self):
        return f"script:{self.source}" if self.source else "script"


def ack_decide(behavior, view):
    return bool(behavior.decide(view))


def load_script(path):
    """One reported bit (0/1) per line; blank lines and ``#`` comments skipped."""
    bits = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line not in ("0", "1"):
            raise ConfigError(f"{path}:{lineno}: expected 0 or 1, got {line!r}")
        bits.append(line == "1")
    return Scripted(tuple(bits), source=str(path))


def parse_behavior(spec):
    """``honest``, ``always_ack``, ``never_ack``, ``flip:<p>`` or ``script:<path>``."""
    if isinstance(spec, Behavior):
        return spec
    name, _, arg = str(spec).partition(":")
    name = name.strip().lower()
    if name == "honest":
        return Honest()
    if name == "always_ack":
        return AlwaysAck()
    if name == "never_ack":
        return NeverAck()
    if name == "flip":
        try:
            return Flip(float(arg) if arg else 0.5)
        except ValueError:
            raise ConfigError(f"bad flip probability in {spec!r}") from None
    if name == "script":
        return load_script(arg)
    raise ConfigError(f"unknown behavior {spec!r}")
