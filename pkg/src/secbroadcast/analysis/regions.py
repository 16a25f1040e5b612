"""Rate regions as intersections of half-planes ``a1*R1 + a2*R2 <= b``.

Coefficients are exact fractions whenever the inputs allow it: erasure
probabilities are read through their decimal representation (``0.7`` is
``7/10``) and ``b = L*log2(q)`` is an integer for ``q`` a power of two.
When exactly one erasure probability is 0 or 1 some coefficients are
infinite, which pins the corresponding rate to zero; such regions carry
``degenerate=True``.
"""

from dataclasses import dataclass
from fractions import Fraction
import csv
import math

from ..errors import DegenerateChannelError, DomainError

INF = math.inf
TOL = 1e-12
BOUNDARY_SAMPLES = 256


def exact(v):
    """``v`` as a Fraction, via its shortest decimal form for floats."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        if not math.isfinite(v):
            raise DomainError(f"{v} is not a finite number")
        return Fraction(repr(v))
    return Fraction(v)


def capacity_unit(L, q):
    """``L * log2(q)`` bits per channel use; exact for powers of two."""
    if L <= 0 or q < 2:
        raise DomainError("need L >= 1 and q >= 2")
    q = int(q)
    if q & (q - 1) == 0:
        return Fraction(L * (q.bit_length() - 1))
    return L * math.log2(q)


@dataclass(frozen=True)
class RatePoint:
    R1: float
    R2: float
    Rc: float = 0

    def __post_init__(self):
        if min(self.R1, self.R2, self.Rc) < 0:
            raise DomainError("rates must be nonnegative")


@dataclass(frozen=True)
class RegionSpec:
    """``constraints`` is a tuple of ``(a1, a2, b)``; the quadrant is implicit."""

    constraints: tuple
    label: str
    degenerate: bool = False

    def contains(self, point, tol=TOL):
        return region_contains(self, point, tol)

    def max_r1(self):
        return _axis_max(self.constraints, 0)

    def max_r2(self):
        return _axis_max(self.constraints, 1)

    def r2_at(self, r1):
        """Largest ``R2`` with ``(r1, R2)`` in the region, or ``None``."""
        best = None
        for a1, a2, b in self.constraints:
            slack = b - _times(a1, r1)
            if slack < 0:
                return None
            if a2 == 0:
                continue
            v = 0 if a2 == INF else slack / a2
            best = v if best is None else min(best, v)
        if best is None:
            raise DomainError("region is unbounded in R2")
        return best

    def as_float(self):
        return RegionSpec(tuple((float(a1), float(a2), float(b)) for a1, a2, b in self.constraints),
                          self.label, self.degenerate)

    def vertices(self):
        """Corner points of the boundary, from R1 = 0 to R1 = max."""
        r1max = self.max_r1()
        if r1max is None:
            return []
        xs = {0, r1max}
        cons = [c for c in self.constraints if INF not in c[:2]]
        for i in range(len(cons)):
            for j in range(i + 1, len(cons)):
                a1, a2, b = cons[i]
                c1, c2, d = cons[j]
                det = a1 * c2 - a2 * c1
                if det == 0:
                    continue
                r1 = (b * c2 - a2 * d) / det
                if 0 <= r1 <= r1max:
                    xs.add(r1)
        pts = []
        for x in sorted(xs):
            y = self.r2_at(x)
            if y is not None:
                pts.append((x, y))
        return pts


def _times(a, r):
    # inf * 0 is 0 here: a zero rate never violates a constraint
    return 0 if r == 0 else a * r


def _axis_max(constraints, axis):
    best = None
    for c in constraints:
        a, b = c[axis], c[2]
        if b < 0:
            return None
        if a == 0:
            continue
        v = 0 if a == INF else b / a
        best = v if best is None else min(best, v)
    return best


def region_contains(region, point, tol=TOL):
    r1, r2 = (point.R1, point.R2) if isinstance(point, RatePoint) else point
    if r1 < 0 or r2 < 0:
        return False
    return all(_times(a1, r1) + _times(a2, r2) <= b + tol for a1, a2, b in region.constraints)


def _deltas(delta1, delta2):
    d1, d2 = exact(delta1), exact(delta2)
    for name, d in (("delta1", d1), ("delta2", d2)):
        if not 0 <= d <= 1:
            raise DomainError(f"{name}={d} is not a probability")
    extreme = [d in (0, 1) for d in (d1, d2)]
    if all(extreme):
        raise DegenerateChannelError(
            f"delta1={delta1}, delta2={delta2}: both channels are degenerate")
    return d1, d2, any(extreme)


def _div(a, b):
    if b == 0:
        if a == 0:
            return Fraction(0)
        return INF
    return a / b


def key_overhead(d1, d2):
    """Per-unit-rate cost of generating Bob's and Calvin's keys."""
    d12 = 1 - d1 * d2
    return _div(1 - d2, d2 * (1 - d1) * d12), _div(1 - d1, d1 * (1 - d2) * d12)


def _add(*terms):
    return INF if INF in terms else sum(terms)


def _sweep(d1, d2):
    d12 = 1 - d1 * d2
    return _div(1, 1 - d1), _div(1, 1 - d2), _div(1, d12)


def secrecy_region(delta1, delta2, L, q):
    d1, d2, degenerate = _deltas(delta1, delta2)
    b = capacity_unit(L, q)
    u1, u2, u12 = _sweep(d1, d2)
    a_b, a_c = key_overhead(d1, d2)
    cons = ((_add(a_b, u1), u12, b), (u12, _add(a_c, u2), b))
    return RegionSpec(cons, "secrecy", degenerate)


def nosecurity_region(delta1, delta2, L, q):
    d1, d2, degenerate = _deltas(delta1, delta2)
    b = capacity_unit(L, q)
    u1, u2, u12 = _sweep(d1, d2)
    return RegionSpec(((u1, u12, b), (u12, u2, b)), "nosecurity", degenerate)


def naive_region(delta1, delta2, L, q):
    """Full-length pads harvested from exclusive receptions, no reuse, no coding."""
    d1, d2, degenerate = _deltas(delta1, delta2)
    b = capacity_unit(L, q)
    u1, u2, _ = _sweep(d1, d2)
    kb = _div(1, (1 - d1) * d2)
    kc = _div(1, (1 - d2) * d1)
    cons = ((_add(kb, u1), u2, b), (u1, _add(kc, u2), b))
    return RegionSpec(cons, "naive", degenerate)


def common_message_region(delta1, delta2, L, q, Rc):
    """Private-rate region left when a common message of rate ``Rc`` is also sent."""
    d1, d2, degenerate = _deltas(delta1, delta2)
    rc = exact(Rc)
    if rc < 0:
        raise DomainError("Rc must be nonnegative")
    b = capacity_unit(L, q)
    u1, u2, u12 = _sweep(d1, d2)
    a_b, a_c = key_overhead(d1, d2)
    bc1 = b - _times(u1, rc)
    bc2 = b - _times(u2, rc)
    cons = (
        (_add(a_b, u1), u12, bc1),
        (_add(a_b, u12), u2, bc2),
        (u1, _add(a_c, u12), bc1),
        (u12, _add(a_c, u2), bc2),
    )
    return RegionSpec(cons, f"common({Rc})", degenerate)


def partial_secrecy_value(delta1, delta2, split):
    """Left-hand side of the partial-secrecy constraint, compared against ``L*log2(q)``."""
    d1, d2, _ = _deltas(delta1, delta2)
    r1s, r1p, r2s, r2p, rc = (exact(v) for v in split)
    if min(r1s, r1p, r2s, r2p, rc) < 0:
        raise DomainError("all rate components must be nonnegative")
    u1, u2, u12 = _sweep(d1, d2)
    a_b, a_c = key_overhead(d1, d2)
    r1, r2 = r1s + r1p, r2s + r2p
    key = max(_times(a_b, r1s) - _times(u12, r1p), _times(a_c, r2s) - _times(u12, r2p), 0)
    send = max(_times(u1, r1 + rc) + _times(u12, r2), _times(u12, r1) + _times(u2, r2 + rc))
    return key + send


def partial_secrecy_region(delta1, delta2, L, q, split):
    """Membership of ``split = (R1', R1'', R2', R2'', Rc)``; primes mark the secret parts."""
    return partial_secrecy_value(delta1, delta2, split) <= capacity_unit(L, q) + TOL


def region_boundary(region, samples=BOUNDARY_SAMPLES):
    """``samples`` points ``(R1, R2)`` on the outer boundary, R1 from 0 to its maximum."""
    r1max = region.max_r1()
    if r1max is None:
        return []
    pts = []
    for i in range(samples):
        r1 = Fraction(i, samples - 1) * r1max if r1max != INF else 0
        if i == samples - 1:
            r1 = r1max
        pts.append((r1, region.r2_at(r1)))
    return pts


def write_boundary_csv(path, points):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["R1", "R2"])
        for r1, r2 in points:
            w.writerow([f"{float(r1):.17g}", f"{float(r2):.17g}"])


REGIONS = {
    "secrecy": secrecy_region,
    "nosecurity": nosecurity_region,
    "naive": naive_region,
}


def ray_fraction(region, point):
    """How far ``point`` is along its ray from the origin, as a fraction of the boundary."""
    r1, r2 = (point.R1, point.R2) if isinstance(point, RatePoint) else point
    if r1 == 0 and r2 == 0:
        return 0.0
    worst = 0.0
    for a1, a2, b in region.constraints:
        load = _times(a1, r1) + _times(a2, r2)
        if b <= 0:
            return INF
        worst = max(worst, float(load) / float(b))
    return worst
