"""Reed-Solomon (Vandermonde) MDS matrices for key distillation and expansion.

The parity-check matrix used to distil a key from ``k1`` received packets
is the ``k1 x kB`` Vandermonde matrix ``V[i, j] = a_i ** j`` on the
evaluation points ``a_i = i`` (field-element encodings ``0 .. k1-1``).
Any ``kB`` of its rows form a square Vandermonde matrix on distinct
points, hence are invertible.  The key-expansion generator is the
transpose shape, ``kB x N`` with ``G[j, c] = a_c ** j``, so any ``kB`` of
its columns are independent.

Matrices are kept in structured form (:class:`Vandermonde`) because the
protocol multiplies by them at sizes where materializing the dense array
would dominate memory; :meth:`Vandermonde.to_array` gives the dense form.
"""

from dataclasses import dataclass
from itertools import combinations
import math

import numpy as np

from . import _kernels
from .errors import DomainError, UnsupportedFieldError
from .field import get_field

EXHAUSTIVE_LIMIT = 10 ** 5
RANDOM_SUBSETS = 1000
RANDOM_SEED = 0x5EC


@dataclass(frozen=True)
class Vandermonde:
    """Vandermonde matrix over GF(q) on points ``0 .. npoints-1``.

    ``orientation="rows"`` gives shape ``(npoints, degree)`` (parity-check
    layout); ``"cols"`` gives ``(degree, npoints)`` (generator layout).
    """

    q: int
    npoints: int
    degree: int
    orientation: str

    @property
    def field(self):
        return get_field(self.q)

    @property
    def shape(self):
        if self.orientation == "rows":
            return (self.npoints, self.degree)
        return (self.degree, self.npoints)

    @property
    def points(self):
        return np.arange(self.npoints, dtype=np.int64)

    def to_array(self):
        f = self.field
        v = np.empty((self.npoints, self.degree), dtype=np.int64)
        for j in range(self.degree):
            v[:, j] = f.pow(self.points, j)
        return v if self.orientation == "rows" else v.T.copy()

    def apply(self, packets):
        """``packets @ self`` for an ``(L, shape[0])`` packet matrix."""
        packets = np.ascontiguousarray(packets, dtype=np.int64)
        if packets.ndim != 2 or packets.shape[1] != self.shape[0]:
            raise DomainError(
                f"packet matrix {packets.shape} does not match {self.shape} coefficients")
        f = self.field
        if self.orientation == "rows":
            return _kernels.vandermonde_left(packets, self.points, self.degree, f.exp, f.log,
                                             f.order, f.char2, f.char)
        return _kernels.vandermonde_right(packets, self.points, f.exp, f.log, f.order, f.char2,
                                          f.char)


def _check_sizes(length, k, q, what):
    if k < 0 or length < 0 or k > length:
        raise DomainError(f"{what}: need 0 <= kB <= {length}, got kB={k}")
    if length > q:
        raise UnsupportedFieldError(
            f"{what}: length {length} exceeds the field order q={q}; no RS construction")


def rs_parity_check(k1, kB, q):
    """The public ``k1 x kB`` matrix whose every ``kB`` rows are invertible."""
    _check_sizes(k1, kB, q, "rs_parity_check")
    return Vandermonde(int(q), int(k1), int(kB), "rows")


def rs_generator(n, kB, q):
    """The public ``kB x n`` generator whose every ``min(kB, n)`` columns are independent.

    Short messages can need more key packets than pad packets (``kB > n``);
    the matrix then has full column rank ``n``.
    """
    _check_sizes(n, min(kB, n), q, "rs_generator")
    if kB < 0:
        raise DomainError(f"rs_generator: kB must be nonnegative, got {kB}")
    return Vandermonde(int(q), int(n), int(kB), "cols")


def _apply(packets, matrix, field):
    if isinstance(matrix, Vandermonde):
        return matrix.apply(packets)
    return field.matmul(packets, matrix)


def derive_key(received, parity, field=None):
    """Distil ``K = X G`` from the ``(L, k1)`` matrix of received packets."""
    field = field or getattr(parity, "field", None)
    if field is None:
        raise DomainError("a field is required for dense coefficient matrices")
    received = np.asarray(received)
    rows = parity.shape[0]
    if received.ndim != 2 or received.shape[1] != rows:
        raise DomainError(f"expected {rows} key-generation packets, got {received.shape}")
    return _apply(received, parity, field)


def expand_key(key, generator, field=None):
    """Expand ``(L, kB)`` key packets to ``(L, N)`` one-time-pad packets."""
    field = field or getattr(generator, "field", None)
    if field is None:
        raise DomainError("a field is required for dense coefficient matrices")
    key = np.asarray(key)
    rows = generator.shape[0]
    if key.ndim != 2 or key.shape[1] != rows:
        raise DomainError(f"expected {rows} key packets, got {key.shape}")
    return _apply(key, generator, field)


def _random_subsets(dim, t, count, seed):
    rng = np.random.default_rng(seed)
    out = np.empty((count, t), dtype=np.int64)
    for s in range(count):
        out[s] = np.sort(rng.choice(dim, size=t, replace=False))
    return out


def check_mds(matrix, mode, t, q=None, *, subsets=RANDOM_SUBSETS, seed=RANDOM_SEED):
    """True iff every ``t``-subset of rows (or columns) has rank ``t``.

    Exhaustive while ``C(dim, t) <= 1e5``; beyond that a fixed-seed sample
    of ``subsets`` uniformly random subsets is checked instead.
    """
    if isinstance(matrix, Vandermonde):
        q = matrix.q
        matrix = matrix.to_array()
    if q is None:
        raise DomainError("field order q is required for a dense matrix")
    field = get_field(q)
    matrix = np.asarray(matrix, dtype=np.int64)
    if mode not in ("rows", "cols"):
        raise DomainError(f"mode must be 'rows' or 'cols', got {mode!r}")
    dim = matrix.shape[0] if mode == "rows" else matrix.shape[1]
    if t > min(matrix.shape):
        raise DomainError(f"t={t} exceeds the smaller dimension of {matrix.shape}")
    if t <= 0:
        return True
    if math.comb(dim, t) <= EXHAUSTIVE_LIMIT:
        idx = np.array(list(combinations(range(dim), t)), dtype=np.int64)
    else:
        idx = _random_subsets(dim, t, subsets, seed)
    ranks = field.subset_ranks(matrix, idx, by_rows=(mode == "rows"))
    return bool(np.all(ranks == t))
