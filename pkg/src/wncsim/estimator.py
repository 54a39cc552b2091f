"""Online round-trip-delay estimation from controller-side timestamps.

Four per-sample situations: Normal (one arrival, RTT below a period),
Vacant (no arrival: the previous estimate grows by one period and the
vacancy counter increments), Rejection (several arrivals: newest wins),
Delayed (one arrival, RTT at or above a period). On an accepted arrival the
send stamp is re-anchored to the accepted message's own, so t2pr - t1pr is
that message's true t1 + t2 even with several rounds in flight, and the
estimate adds the last v_s - 1 recorded round diffs:

  t_m = (t2pr - t1pr) + sum of t_pa[0 .. v_s-2]

A zero payload before any real measurement counts as a vacancy (the
startup convention: the first echo leaves the plant before any drive has
acted, so it reads exactly zero).
"""

from __future__ import annotations

import enum
from collections import deque

QUEUE_DEPTH = 8


class Rule(enum.Enum):
    NORMAL = "normal"
    VACANT = "vacant"
    REJECTION = "rejection"
    DELAYED = "delayed"


class EstimatorState:
    def __init__(self, period_ms=20, initial_tm=0.0):
        if period_ms <= 0:
            raise ValueError("sample period must be positive")
        self.period_ms = period_ms
        self.t1pr = 0
        self.t2pr = 0
        self.t_pa = deque(maxlen=QUEUE_DEPTH)  # most recent first
        self.v_s = 1
        self.t_m = float(initial_tm)
        self.t_d = 0.0
        self.last_send = None
        self.received = False
        self._seen_nonzero = False
        self._round_complete = False


def on_send(state, timestamp):
    """Record a send stamp; archive the last completed round's diff."""
    if state.last_send is not None and timestamp < state.last_send:
        raise ValueError("send timestamps must be nondecreasing")
    if state._round_complete:
        state.t_pa.appendleft(state.t_d)
        state._round_complete = False
    state.last_send = timestamp
    state.t1pr = timestamp
    return state


def estimate(state):
    """Eq.-style estimate; requires at least one accepted receive."""
    if not state.received:
        raise ValueError("no receive to estimate from")
    past = list(state.t_pa)[: max(0, state.v_s - 1)]
    return float(state.t2pr - state.t1pr + sum(past))


def classify_and_measure(state, deliveries, now):
    """Apply the per-sample rule; returns (rule, accepted message or None).

    Accepted arrivals update t_m through estimate(); vacancies extend the
    previous estimate by one period and bump v_s.
    """
    accepted = deliveries[-1] if deliveries else None
    if accepted is not None and not state._seen_nonzero and accepted.payload == 0:
        accepted = None  # startup zero reads as a vacancy
    if accepted is None:
        state.v_s += 1
        state.t_m = state.t_m + state.period_ms
        return Rule.VACANT, None
    state.t1pr = accepted.sent_at
    state.t2pr = accepted.delivery
    state.t_d = float(state.t2pr - state.t1pr)
    state.received = True
    if len(deliveries) > 1:
        rule = Rule.REJECTION
    elif state.t_d < state.period_ms:
        rule = Rule.NORMAL
    else:
        rule = Rule.DELAYED
    state.t_m = estimate(state)
    state.v_s = 1
    state._round_complete = True
    state._seen_nonzero = True
    return rule, accepted
