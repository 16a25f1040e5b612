"""Line-oriented trace files: one header comment, a column row, one row per transmission.

Columns are ``i,phase,x_hex,S,S*,y1_hex,y2_hex,expr``; erased outputs are
written as ``⊥`` and ``expr`` names what the packet carries.
"""

import csv
import io

from .channel import ChannelState
from .errors import ConfigError
from .field import get_field
from .protocol.scheduler import KEY, PHASE_NAMES, UB, UBUC, UC

ERASED = "⊥"
COLUMNS = ("i", "phase", "x_hex", "S", "S*", "y1_hex", "y2_hex", "expr")
HEADER_KEYS = ("q", "L", "N1", "N2", "seed")


def _expr(kind, ub, uc):
    if kind == KEY:
        return "random"
    if kind == UB:
        return f"U_{{B,{ub + 1}}}"
    if kind == UC:
        return f"U_{{C,{uc + 1}}}"
    if kind == UBUC:
        return f"U_{{B,{ub + 1}}}⊕U_{{C,{uc + 1}}}"
    raise ValueError(kind)


def _exprs(tr):
    if hasattr(tr, "exprs"):
        return list(tr.exprs)
    return [_expr(k, b, c) for k, b, c in zip(tr.kind, tr.ub, tr.uc)]


def _header(tr):
    n1 = tr.N1 if hasattr(tr, "N1") else tr.params.N1
    n2 = tr.N2 if hasattr(tr, "N2") else tr.params.N2
    vals = dict(q=tr.q, L=tr.L, N1=n1, N2=n2, seed=tr.seed)
    return "# " + ",".join(f"{k}={vals[k]}" for k in HEADER_KEYS)


def render_trace(tr):
    """The trace of a full or simplified transcript as text."""
    f = get_field(tr.q)
    buf = io.StringIO()
    buf.write(_header(tr) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    s_true = [ChannelState(int(s)) for s in tr.s_true]
    s_rep = [ChannelState(int(s)) for s in tr.s_reported]
    for i, (expr, s, sr) in enumerate(zip(_exprs(tr), s_true, s_rep)):
        x = f.to_hex(tr.x[:, i])
        w.writerow([i + 1, PHASE_NAMES[int(tr.phase[i])], x, s.tag, sr.tag,
                    x if s.bob else ERASED, x if s.calvin else ERASED, expr])
    return buf.getvalue()


def write_trace(path, tr):
    text = render_trace(tr)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return text


def read_trace(path):
    """``(header, rows)`` of a trace file; rows are dicts keyed by column name."""
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline().rstrip("\n")
        if not first.startswith("# "):
            raise ConfigError(f"{path}: missing trace header")
        header = {}
        for item in first[2:].split(","):
            k, _, v = item.partition("=")
            header[k] = int(v)
        rows = list(csv.DictReader(fh))
    return header, rows


def first_difference(a, b):
    """1-based line number of the first difference between two texts, or None."""
    la, lb = a.splitlines(), b.splitlines()
    for i, (x, y) in enumerate(zip(la, lb), 1):
        if x != y:
            return i
    if len(la) != len(lb):
        return min(len(la), len(lb)) + 1
    return None
