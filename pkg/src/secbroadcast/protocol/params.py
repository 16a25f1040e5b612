"""Protocol constants computed from message sizes and erasure rates."""

from dataclasses import dataclass, field
import math

from ..errors import DegenerateChannelError, DomainError

PARAM_NAMES = ("kB", "kC", "k1", "k2", "n1", "n2", "n3", "n4", "n")


def _ceil(v):
    # float noise must not push an exact integer up by one
    return math.ceil(v - 1e-12 * max(1.0, abs(v)))


def _slack(x):
    return x + x ** 0.75 if x > 0 else 0.0


@dataclass(frozen=True)
class ProtocolParams:
    """Integer budgets of one protocol instance.

    ``raw`` keeps the real values before rounding up.  The gate
    thresholds are kept real; a count errs when it falls strictly short.
    """

    N1: int
    N2: int
    kB: int
    kC: int
    k1: int
    k2: int
    n1: int
    n2: int
    n3: int
    n4: int
    delta1: float
    delta2: float
    raw: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        ints = ("N1", "N2", "kB", "kC", "k1", "k2", "n1", "n2", "n3", "n4")
        if any(getattr(self, k) < 0 for k in ints):
            raise DomainError("protocol parameters must be nonnegative")
        if self.kB > self.k1 or self.kC > self.k2:
            raise DomainError("need kB <= k1 and kC <= k2")

    @property
    def n(self):
        return self.n1 + self.n2 + self.n3 + self.n4

    @property
    def _d12(self):
        return 1 - self.delta1 * self.delta2

    @property
    def bob_threshold_6(self):
        return self.N1 * (1 - self.delta1) / self._d12

    @property
    def calvin_threshold_6(self):
        return self.N1 * (1 - self.delta2) / self._d12

    @property
    def calvin_threshold_8(self):
        return self.N2 * (1 - self.delta2) / self._d12

    @property
    def bob_threshold_8(self):
        return self.N2 * (1 - self.delta1) / self._d12

    def as_dict(self):
        return {k: getattr(self, k) for k in ("N1", "N2") + PARAM_NAMES}

    def swapped(self):
        """The same instance with Bob and Calvin exchanged."""
        return ProtocolParams(self.N2, self.N1, self.kC, self.kB, self.k2, self.k1,
                              self.n1, self.n3, self.n2, self.n4, self.delta2, self.delta1)


def _check_delta(d1, d2):
    for name, d in (("delta1", d1), ("delta2", d2)):
        if not 0 < d < 1:
            raise DegenerateChannelError(f"{name}={d}: parameters need 0 < delta < 1")


def compute_params(N1, N2, delta1, delta2):
    """Budgets for sending N1 packets to Bob and N2 to Calvin.

    Every value is rounded up; each key-size-dependent quantity is computed
    from the already rounded key size.
    """
    _check_delta(delta1, delta2)
    if N1 < 0 or N2 < 0 or N1 + N2 == 0:
        raise DomainError("need N1, N2 >= 0 and not both zero")
    d1, d2 = float(delta1), float(delta2)
    d12 = 1 - d1 * d2
    raw = {}
    raw["kB"] = _slack(N1 * (1 - d2) / d12)
    raw["kC"] = _slack(N2 * (1 - d1) / d12)
    kB, kC = _ceil(raw["kB"]), _ceil(raw["kC"])
    raw["k1"] = kB / d2 + (2 * kB / d2) ** 0.75 / d2
    raw["k2"] = kC / d1 + (2 * kC / d1) ** 0.75 / d1
    k1, k2 = _ceil(raw["k1"]), _ceil(raw["k2"])
    raw["n1"] = max(_slack(k1 / (1 - d1)), _slack(k2 / (1 - d2)))
    raw["n2"] = _slack(N1 / d12)
    raw["n3"] = _slack(N2 / d12)
    n1, n2, n3 = _ceil(raw["n1"]), _ceil(raw["n2"]), _ceil(raw["n3"])
    raw["n4"] = max(_slack(N1 / (1 - d1)) - n2, _slack(N2 / (1 - d2)) - n3, 0.0)
    n4 = _ceil(raw["n4"])
    raw["n"] = raw["n1"] + raw["n2"] + raw["n3"] + raw["n4"]
    return ProtocolParams(N1, N2, kB, kC, k1, k2, n1, n2, n3, n4, d1, d2, raw)
