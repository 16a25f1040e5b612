"""Alice's transmission schedule as a function of the public ACK history.

The scheduler never sees packet contents or true channel states, only
the reported ACK pair of each transmission, so replaying the reported
states through a fresh scheduler reproduces the schedule exactly.

Each scheduled transmission is an :class:`Action` naming the step that
issued it and which encrypted packets it carries.
"""

from typing import NamedTuple

# steps that issue transmissions
KEYGEN, TO_BOB, TO_CALVIN, TO_BOTH = 1, 6, 8, 10
DONE = 0

# payload kinds
KEY, UB, UC, UBUC = 0, 1, 2, 3
KIND_NAMES = {KEY: "key", UB: "UB", UC: "UC", UBUC: "UB+UC"}
PHASE_NAMES = {KEYGEN: "keygen", TO_BOB: "to_bob", TO_CALVIN: "to_calvin", TO_BOTH: "to_both"}

_EPS = 1e-9


class Action(NamedTuple):
    phase: int
    kind: int
    ub: int = -1
    uc: int = -1


class Scheduler:
    """Steps 1-11 of the protocol driven by reported ACKs.

    Call :meth:`next` for the next transmission (``None`` once the session
    is over), then :meth:`feedback` with the two reported ACK bits.

    Once a receiver is in error its ACKs are ignored for scheduling, as if
    it were not there.  A receiver with an empty message is never flagged.
    """

    def __init__(self, params):
        self.params = params
        self.t = 0
        self.phase = KEYGEN
        self.err_bob = None
        self.err_calvin = None
        self.phase_marks = {KEYGEN: 0}
        self.bob_keygen = []
        self.calvin_keygen = []
        # step 6
        self.j = 0
        self.t6 = 0
        self.bob_acks6 = 0
        self.calvin_acks6 = 0
        self.ub_pending = []
        # step 8
        self.l = 0
        self.t8 = 0
        self.bob_acks8 = 0
        self.calvin_acks8 = 0
        self.uc_pending = []
        # step 10
        self.ub_list = None
        self.uc_list = None
        self.jb = 0
        self.lc = 0
        self.t10b = 0
        self.t10c = 0
        self._current = None

    # -- status ------------------------------------------------------------

    @property
    def done(self):
        return self.phase == DONE

    @property
    def keygen_finished(self):
        return self.phase != KEYGEN

    def bob_complete(self):
        return self._complete(self.err_bob, self.params.N1, self.j, self.ub_pending,
                              self.ub_list, self.jb)

    def calvin_complete(self):
        return self._complete(self.err_calvin, self.params.N2, self.l, self.uc_pending,
                              self.uc_list, self.lc)

    @staticmethod
    def _complete(err, total, sent, pending, lst, pos):
        if err is not None:
            return False
        if total == 0:
            return True
        if sent < total:
            return False
        return pos >= len(lst) if lst is not None else not pending

    # -- transitions ---------------------------------------------------------

    def _error(self, who, step):
        if who == "bob":
            if self.err_bob is None and self.params.N1 > 0:
                self.err_bob = step
        elif self.err_calvin is None and self.params.N2 > 0:
            self.err_calvin = step
        if self.err_bob is not None and self.err_calvin is not None:
            self.phase = DONE

    def _enter(self, phase):
        if self.phase == DONE:
            return
        self.phase = phase
        self.phase_marks[phase] = self.t
        if phase == TO_BOTH:
            self.ub_list = self.ub_pending if self.err_bob is None else []
            self.uc_list = self.uc_pending if self.err_calvin is None else []

    def _finish_keygen(self):
        p = self.params
        if len(self.bob_keygen) < p.k1:
            self._error("bob", "2")
        if len(self.calvin_keygen) < p.k2:
            self._error("calvin", "2")
        self._enter(TO_BOB)

    def _hard_stop(self):
        if not self.bob_complete():
            self._error("bob", "11")
        if not self.calvin_complete():
            self._error("calvin", "11")
        self.phase = DONE

    def next(self):
        if self._current is not None:
            raise RuntimeError("feedback for the previous transmission is missing")
        self._current = self._next()
        return self._current

    def _next(self):
        p = self.params
        while True:
            if self.phase == DONE:
                return None
            if self.t >= p.n:
                self._hard_stop()
                return None
            if self.phase == KEYGEN:
                if self.t < p.n1:
                    return Action(KEYGEN, KEY)
                self._finish_keygen()
            elif self.phase == TO_BOB:
                if self.err_bob is not None or self.j >= p.N1:
                    self._enter(TO_CALVIN)
                elif self.t6 >= p.n2 + p.n4:
                    self._error("bob", "7b")
                    self._enter(TO_CALVIN)
                else:
                    return Action(TO_BOB, UB, self.j)
            elif self.phase == TO_CALVIN:
                if self.err_calvin is not None or self.l >= p.N2:
                    self._enter(TO_BOTH)
                elif self.t8 >= p.n3 + p.n4:
                    self._error("calvin", "9b")
                    self._enter(TO_BOTH)
                else:
                    return Action(TO_CALVIN, UC, -1, self.l)
            else:
                bob = self.err_bob is None and self.jb < len(self.ub_list)
                if bob and self.t6 + self.t10b >= p.n2 + p.n4:
                    self._error("bob", "11")
                    bob = False
                calvin = self.err_calvin is None and self.lc < len(self.uc_list)
                if calvin and self.t8 + self.t10c >= p.n3 + p.n4:
                    self._error("calvin", "11")
                    calvin = False
                if bob and calvin:
                    return Action(TO_BOTH, UBUC, self.ub_list[self.jb], self.uc_list[self.lc])
                if bob:
                    return Action(TO_BOTH, UB, self.ub_list[self.jb])
                if calvin:
                    return Action(TO_BOTH, UC, -1, self.uc_list[self.lc])
                self.phase = DONE

    def feedback(self, bob_ack, calvin_ack):
        act = self._current
        if act is None:
            raise RuntimeError("no transmission is pending")
        self._current = None
        p = self.params
        self.t += 1
        b = bool(bob_ack) and self.err_bob is None
        c = bool(calvin_ack) and self.err_calvin is None
        phase = act.phase
        if phase == KEYGEN:
            if b and len(self.bob_keygen) < p.k1:
                self.bob_keygen.append(self.t - 1)
            if c and len(self.calvin_keygen) < p.k2:
                self.calvin_keygen.append(self.t - 1)
        elif phase == TO_BOB:
            self.t6 += 1
            if b or c:
                if b:
                    self.bob_acks6 += 1
                else:
                    self.ub_pending.append(act.ub)
                if c:
                    self.calvin_acks6 += 1
                self.j += 1
            if self.t6 == p.n2 and self.j < p.N1:
                self.gate_7a()
        elif phase == TO_CALVIN:
            self.t8 += 1
            if b or c:
                if c:
                    self.calvin_acks8 += 1
                else:
                    self.uc_pending.append(act.uc)
                if b:
                    self.bob_acks8 += 1
                self.l += 1
            if self.t8 == p.n3 and self.l < p.N2:
                self.gate_9a()
        else:
            if act.kind != UC:
                self.t10b += 1
                self.jb += b
            if act.kind != UB:
                self.t10c += 1
                self.lc += c

    def gate_7a(self):
        """After n2 transmissions of U_B with packets left: check both ACK counts."""
        p = self.params
        if self.bob_acks6 < p.bob_threshold_6 - _EPS:
            self._error("bob", "7a")
        if self.calvin_acks6 < p.calvin_threshold_6 - _EPS:
            self._error("calvin", "7a")

    def gate_9a(self):
        p = self.params
        if self.calvin_acks8 < p.calvin_threshold_8 - _EPS:
            self._error("calvin", "9a")
        if self.bob_acks8 < p.bob_threshold_8 - _EPS:
            self._error("bob", "9a")

    def step(self, bob_ack, calvin_ack):
        """Feedback for the pending transmission, then the next one."""
        self.feedback(bob_ack, calvin_ack)
        return self.next()


def replay_schedule(params, reported):
    """Actions a fresh scheduler issues for a sequence of reported states."""
    sched = Scheduler(params)
    actions = []
    for s in reported:
        act = sched.next()
        if act is None:
            break
        actions.append(act)
        sched.feedback(int(s) & 1, int(s) & 2)
    return actions, sched
