"""Compiled inner loops for table-driven field arithmetic.

Every kernel receives the field as ``(exp, log, order, char2, p)`` where
``order = q - 1`` is the size of the multiplicative group, ``exp`` has
length ``2 * order`` so that summed logs never need a modulo, and ``p`` is
the characteristic (only used when ``char2`` is false).
"""

import numba
import numpy as np


@numba.njit(cache=True, inline="always")
def _add(a, b, char2, p):
    if char2:
        return a ^ b
    return (a + b) % p


@numba.njit(cache=True, inline="always")
def _sub(a, b, char2, p):
    if char2:
        return a ^ b
    return (a - b) % p


@numba.njit(cache=True, inline="always")
def _mul(a, b, exp, log):
    if a == 0 or b == 0:
        return 0
    return exp[log[a] + log[b]]


@numba.njit(cache=True)
def matmul(a, b, exp, log, char2, p):
    n, m = a.shape
    r = b.shape[1]
    out = np.zeros((n, r), dtype=np.int64)
    for i in range(n):
        for k in range(m):
            x = a[i, k]
            if x == 0:
                continue
            lx = log[x]
            for j in range(r):
                y = b[k, j]
                if y != 0:
                    out[i, j] = _add(out[i, j], exp[lx + log[y]], char2, p)
    return out


@numba.njit(cache=True)
def vandermonde_left(pm, points, ncols, exp, log, order, char2, p):
    """``pm @ V`` with ``V[i, j] = points[i] ** j`` (``0 ** 0 == 1``)."""
    rows, m = pm.shape
    out = np.zeros((rows, ncols), dtype=np.int64)
    for l in range(rows):
        for i in range(m):
            x = pm[l, i]
            if x == 0:
                continue
            a = points[i]
            if a == 0:
                if ncols > 0:
                    out[l, 0] = _add(out[l, 0], x, char2, p)
                continue
            e = log[x]
            la = log[a]
            for j in range(ncols):
                out[l, j] = _add(out[l, j], exp[e], char2, p)
                e += la
                if e >= order:
                    e -= order
    return out


@numba.njit(cache=True)
def vandermonde_right(pm, points, exp, log, order, char2, p):
    """``pm @ V.T``: evaluates each row of ``pm`` as a polynomial at ``points``."""
    rows, k = pm.shape
    npts = points.shape[0]
    out = np.zeros((rows, npts), dtype=np.int64)
    # running log of points[c] ** j, kept per point so the inner loop is independent
    la = np.zeros(npts, dtype=np.int64)
    pw = np.zeros(npts, dtype=np.int64)
    for c in range(npts):
        if points[c] != 0:
            la[c] = log[points[c]]
    for l in range(rows):
        pw[:] = 0
        for j in range(k):
            x = pm[l, j]
            if x != 0:
                e = log[x]
                for c in range(npts):
                    if points[c] != 0:
                        out[l, c] = _add(out[l, c], exp[e + pw[c]], char2, p)
                    elif j == 0:
                        out[l, c] = _add(out[l, c], x, char2, p)
            for c in range(npts):
                v = pw[c] + la[c]
                pw[c] = v - order if v >= order else v
    return out


@numba.njit(cache=True)
def rank_inplace(m, exp, log, order, char2, p):
    rows, cols = m.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        piv = -1
        for r in range(rank, rows):
            if m[r, c] != 0:
                piv = r
                break
        if piv < 0:
            continue
        if piv != rank:
            for j in range(cols):
                t = m[piv, j]
                m[piv, j] = m[rank, j]
                m[rank, j] = t
        inv_log = (order - log[m[rank, c]]) % order
        for r in range(rank + 1, rows):
            v = m[r, c]
            if v == 0:
                continue
            f = (log[v] + inv_log) % order
            for j in range(c, cols):
                w = m[rank, j]
                if w != 0:
                    m[r, j] = _sub(m[r, j], exp[f + log[w]], char2, p)
        rank += 1
    return rank


@numba.njit(cache=True)
def subset_ranks(mat, subsets, by_rows, exp, log, order, char2, p):
    """Rank of ``mat`` restricted to each row (or column) subset."""
    ns, t = subsets.shape
    out = np.empty(ns, dtype=np.int64)
    other = mat.shape[1] if by_rows else mat.shape[0]
    buf = np.empty((t, other), dtype=np.int64)
    for s in range(ns):
        for a in range(t):
            idx = subsets[s, a]
            for b in range(other):
                buf[a, b] = mat[idx, b] if by_rows else mat[b, idx]
        out[s] = rank_inplace(buf, exp, log, order, char2, p)
    return out
