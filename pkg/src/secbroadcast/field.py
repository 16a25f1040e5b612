"""Finite fields F_q and packet algebra over F_q^L.

Two families are supported: binary extension fields GF(2^k) for
1 <= k <= 16, each with a fixed primitive polynomial, and prime fields
GF(p) for p <= 257 (small instances and tests).

A *packet* is a length-L vector of symbols and a *packet matrix* is an
``(L, m)`` array whose column ``j`` is packet ``j``.  All arrays use
``int64`` with canonical representatives ``0 <= v < q``.
"""

from functools import lru_cache
import math

import numpy as np

from . import _kernels
from .errors import DomainError, UnsupportedFieldError

# x^k + ... (bit k set), primitive for every k listed.
PRIMITIVE_POLYS = {
    1: 0x3,
    2: 0x7,
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x89,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}

MAX_PRIME = 257
DEFAULT_Q = 1 << 16


def _is_prime(n):
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def _primitive_root(p):
    order = p - 1
    factors = [d for d in range(2, order + 1) if order % d == 0 and _is_prime(d)]
    for g in range(1, p):
        if all(pow(g, order // f, p) != 1 for f in factors):
            return g
    raise UnsupportedFieldError(f"no primitive root modulo {p}")


class GF:
    """The finite field of order ``q``.

    Arithmetic methods accept Python ints or numpy arrays and broadcast
    like numpy operators.

    >>> F = GF(256)
    >>> F.mul(F.inv(7), 7)
    1
    """

    def __init__(self, q):
        q = int(q)
        if q >= 2 and q & (q - 1) == 0:
            k = q.bit_length() - 1
            if k not in PRIMITIVE_POLYS:
                raise UnsupportedFieldError(f"GF(2^{k}) is not supported (k <= 16)")
            self.char, self.degree, self.poly = 2, k, PRIMITIVE_POLYS[k]
        elif _is_prime(q) and q <= MAX_PRIME:
            self.char, self.degree, self.poly = q, 1, None
        else:
            raise UnsupportedFieldError(
                f"q={q}: need 2^k with k <= 16 or a prime <= {MAX_PRIME}")
        self.q = q
        self.order = q - 1
        self.char2 = self.char == 2
        self._build_tables()

    def _build_tables(self):
        order = self.order
        exp = np.zeros(2 * order, dtype=np.int64)
        log = np.zeros(self.q, dtype=np.int64)
        if self.char2:
            x = 1
            for i in range(order):
                exp[i] = x
                x <<= 1
                if x & self.q:
                    x ^= self.poly
        else:
            g = _primitive_root(self.q)
            x = 1
            for i in range(order):
                exp[i] = x
                x = x * g % self.q
        if len(set(exp[:order].tolist())) != order:
            raise UnsupportedFieldError(f"generator of GF({self.q}) is not primitive")
        exp[order:] = exp[:order]
        log[exp[:order]] = np.arange(order)
        self.exp = exp
        self.log = log
        self.exp.flags.writeable = False
        self.log.flags.writeable = False

    def __repr__(self):
        return f"GF({self.q})"

    def __eq__(self, other):
        return isinstance(other, GF) and other.q == self.q

    def __hash__(self):
        return hash(("GF", self.q))

    def __reduce__(self):
        return (get_field, (self.q,))

    @property
    def _kargs(self):
        return self.exp, self.log, self.char2, self.char

    # -- scalar / elementwise arithmetic ---------------------------------

    def _check(self, a):
        arr = np.asarray(a)
        if arr.size and (arr.min() < 0 or arr.max() >= self.q):
            raise DomainError(f"value outside GF({self.q})")
        return arr

    @staticmethod
    def _out(r, like):
        return int(r) if np.ndim(like) == 0 else r

    def add(self, a, b):
        a, b = self._check(a), self._check(b)
        r = np.bitwise_xor(a, b) if self.char2 else (a + b) % self.q
        return self._out(r, r)

    def neg(self, a):
        a = self._check(a)
        r = a if self.char2 else (-a) % self.q
        return self._out(r, r)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        a, b = self._check(a), self._check(b)
        r = np.where((a == 0) | (b == 0), 0, self.exp[self.log[a] + self.log[b]])
        return self._out(r, r)

    def inv(self, a):
        a = self._check(a)
        if np.any(a == 0):
            raise DomainError("inverse of zero")
        r = self.exp[(self.order - self.log[a]) % self.order]
        return self._out(r, r)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e):
        a = self._check(a)
        if e < 0:
            return self.pow(self.inv(a), -e)
        r = np.where(a == 0, int(e == 0), self.exp[(self.log[a] * e) % self.order])
        return self._out(r, r)

    def field_arith(self, a, b, op):
        """Dispatch one of ``add``, ``mul`` or ``inv`` (the latter ignores ``b``)."""
        if op == "add":
            return self.add(a, b)
        if op == "mul":
            return self.mul(a, b)
        if op == "inv":
            return self.inv(a)
        raise DomainError(f"unknown field operation {op!r}")

    # -- vectors and matrices --------------------------------------------

    def random(self, rng, shape):
        return rng.integers(0, self.q, size=shape, dtype=np.int64)

    def zeros(self, shape):
        return np.zeros(shape, dtype=np.int64)

    def identity(self, n):
        return np.eye(n, dtype=np.int64)

    def matmul(self, a, b):
        a = self._check(a).astype(np.int64, copy=False)
        b = self._check(b).astype(np.int64, copy=False)
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise DomainError(f"cannot multiply {a.shape} by {b.shape}")
        return _kernels.matmul(np.ascontiguousarray(a), np.ascontiguousarray(b), *self._kargs)

    def rank(self, m):
        m = np.array(self._check(m), dtype=np.int64)
        if m.ndim != 2:
            raise DomainError("rank needs a 2-D matrix")
        if m.size == 0:
            return 0
        return int(_kernels.rank_inplace(m, self.exp, self.log, self.order, self.char2, self.char))

    def subset_ranks(self, m, subsets, by_rows=True):
        m = np.ascontiguousarray(self._check(m), dtype=np.int64)
        subsets = np.ascontiguousarray(subsets, dtype=np.int64)
        if subsets.ndim != 2:
            raise DomainError("subsets must be a 2-D index array")
        return _kernels.subset_ranks(m, subsets, by_rows, self.exp, self.log,
                                     self.order, self.char2, self.char)

    # -- serialization ----------------------------------------------------

    @property
    def symbol_bytes(self):
        return max(1, (self.q - 1).bit_length() + 7 >> 3)

    def to_hex(self, packet):
        """Little-endian bytes of each symbol, concatenated as lowercase hex."""
        nb = self.symbol_bytes
        return "".join(int(v).to_bytes(nb, "little").hex() for v in np.asarray(packet).ravel())

    def from_hex(self, text):
        nb = 2 * self.symbol_bytes
        if len(text) % nb:
            raise DomainError(f"hex length {len(text)} is not a multiple of {nb}")
        vals = [int.from_bytes(bytes.fromhex(text[i:i + nb]), "little")
                for i in range(0, len(text), nb)]
        return self._check(np.array(vals, dtype=np.int64))


@lru_cache(maxsize=None)
def get_field(q):
    """Shared field instance for order ``q``."""
    return GF(q)


def make_packet(field, symbols):
    """Validate a 1-D packet; zero-length packets are rejected."""
    arr = np.array(field._check(symbols), dtype=np.int64)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("a packet is a non-empty 1-D vector of symbols")
    arr.flags.writeable = False
    return arr


def packet_add(field, a, b):
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise DomainError(f"packet lengths differ: {a.shape} vs {b.shape}")
    return field.add(a, b)


def packet_sub(field, a, b):
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise DomainError(f"packet lengths differ: {a.shape} vs {b.shape}")
    return field.sub(a, b)


def mat_apply(field, packets, coeffs):
    """Combine packet columns: ``(L, m) @ (m, r) -> (L, r)`` over F_q."""
    packets, coeffs = np.asarray(packets), np.asarray(coeffs)
    if packets.ndim != 2 or coeffs.ndim != 2 or packets.shape[1] != coeffs.shape[0]:
        raise DomainError(f"cannot apply {coeffs.shape} coefficients to {packets.shape} packets")
    return field.matmul(packets, coeffs)
