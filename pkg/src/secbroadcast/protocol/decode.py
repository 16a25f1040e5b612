"""Receiver-side decoding from public ACKs and the receiver's own outputs."""

import numpy as np

from ..errors import DomainError
from .scheduler import KEYGEN, UB, UBUC, UC
from .session import make_keys


def decode(receiver, transcript):
    """Message estimate of ``receiver`` ("bob" or "calvin"), or ``None``.

    Uses only what that receiver has: the public schedule and reported
    states, its own channel outputs, and the public code matrices.  A
    coded packet is peeled with the other receiver's packet when this
    receiver heard that packet in pure form.
    """
    tr = transcript
    p = tr.params
    f = tr.field
    if receiver == "bob":
        bit, own_kind, other_kind = 1, UB, UC
        own_idx, other_idx, count, k = tr.ub, tr.uc, p.N1, p.k1
    elif receiver == "calvin":
        bit, own_kind, other_kind = 2, UC, UB
        own_idx, other_idx, count, k = tr.uc, tr.ub, p.N2, p.k2
    else:
        raise DomainError(f"unknown receiver {receiver!r}")
    if count == 0:
        return np.zeros((tr.L, 0), dtype=np.int64)
    got = (tr.s_true & bit) != 0
    acked = (tr.s_reported & bit) != 0

    keypos = np.flatnonzero((tr.phase == KEYGEN) & acked)[:k]
    if len(keypos) < k or not got[keypos].all():
        return None
    # same packets in, same key out: skip the recomputation when Alice's matches
    expanded = tr.keys.expanded_from(receiver, tr.x[:, keypos])
    if expanded is None:
        _, expanded = make_keys(p, tr.q, tr.x, keypos, receiver)

    u = np.zeros((tr.L, count), dtype=np.int64)
    known = np.zeros(count, dtype=bool)
    pure = got & (tr.kind == own_kind)
    u[:, own_idx[pure]] = tr.x[:, pure]
    known[own_idx[pure]] = True

    coded = got & (tr.kind == UBUC) & ~known[own_idx]
    if coded.any():
        other_count = p.N2 if receiver == "bob" else p.N1
        side = np.zeros((tr.L, other_count), dtype=np.int64)
        have = np.zeros(other_count, dtype=bool)
        opure = got & (tr.kind == other_kind)
        side[:, other_idx[opure]] = tr.x[:, opure]
        have[other_idx[opure]] = True
        coded &= have[other_idx]
        cols = np.flatnonzero(coded)
        u[:, own_idx[cols]] = f.sub(tr.x[:, cols], side[:, other_idx[cols]])
        known[own_idx[cols]] = True
    if not known.all():
        return None
    return f.sub(u, expanded)
