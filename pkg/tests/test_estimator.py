import random
import statistics

import pytest

from wncsim.estimator import EstimatorState, Rule, classify_and_measure, estimate, on_send
from wncsim.netsim import TimedMessage


def msg(payload, sent_at, delivery, seq=0):
    return TimedMessage(payload=payload, seq=seq, sent_at=sent_at, delivery=delivery)


def receive(state, m, now=None):
    return classify_and_measure(state, [m], now if now is not None else m.delivery)


class TestEstimateFormula:
    def test_worked_timeline_70ms(self):
        state = EstimatorState()
        state.t1pr, state.t2pr = 74, 93
        state.t_pa.extend([29, 22, 40, 11])
        state.v_s = 3
        state.received = True
        assert estimate(state) == 70.0

    def test_worked_timeline_50ms(self):
        state = EstimatorState()
        state.t1pr, state.t2pr = 108, 124
        state.t_pa.extend([15, 19, 29, 22])
        state.v_s = 3
        state.received = True
        assert estimate(state) == 50.0

    def test_no_vacancy_is_plain_rtt(self):
        state = EstimatorState()
        state.t1pr, state.t2pr = 100, 123
        state.t_pa.extend([40, 35])
        state.v_s = 1
        state.received = True
        assert estimate(state) == 23.0

    def test_sum_clamps_to_recorded_history(self):
        state = EstimatorState()
        state.t1pr, state.t2pr = 0, 55
        state.t_pa.append(50)
        state.v_s = 5  # asks for 4 past diffs, only 1 recorded
        state.received = True
        assert estimate(state) == 105.0

    def test_estimate_requires_a_receive(self):
        with pytest.raises(ValueError):
            estimate(EstimatorState())


class TestOnSend:
    def test_first_send_sets_stamp(self):
        state = on_send(EstimatorState(), 0)
        assert state.t1pr == 0 and state.last_send == 0

    def test_completed_round_archives_diff(self):
        state = EstimatorState()
        on_send(state, 0)
        receive(state, msg(50.0, sent_at=0, delivery=23), now=40)
        on_send(state, 40)
        assert list(state.t_pa) == [23.0]

    def test_unanswered_sends_archive_nothing(self):
        state = EstimatorState()
        on_send(state, 0)
        on_send(state, 20)
        on_send(state, 40)
        assert list(state.t_pa) == []

    def test_queue_keeps_most_recent_first(self):
        state = EstimatorState()
        t = 0
        for k in range(12):
            on_send(state, t)
            receive(state, msg(10.0 + k, sent_at=t, delivery=t + 10 + k), now=t + 20)
            t += 20
        on_send(state, t)
        assert len(state.t_pa) == 8
        assert list(state.t_pa)[0] == 21.0  # diff of the latest closed round

    def test_non_monotone_send_rejected(self):
        state = EstimatorState()
        on_send(state, 100)
        with pytest.raises(ValueError):
            on_send(state, 80)


class TestRules:
    def test_normal_below_period(self):
        state = EstimatorState()
        rule, accepted = receive(state, msg(5.0, sent_at=0, delivery=15), now=20)
        assert rule is Rule.NORMAL
        assert accepted is not None
        assert state.t_m == 15.0 and state.t_d == 15.0

    def test_delayed_at_or_above_period(self):
        state = EstimatorState()
        rule, _ = receive(state, msg(5.0, sent_at=0, delivery=35), now=40)
        assert rule is Rule.DELAYED
        assert state.t_m == 35.0

    def test_vacant_extends_previous_estimate(self):
        state = EstimatorState()
        receive(state, msg(5.0, sent_at=0, delivery=15), now=20)
        for k in range(1, 4):
            rule, accepted = classify_and_measure(state, [], now=20 + 20 * k)
            assert rule is Rule.VACANT and accepted is None
            assert state.t_m == 15.0 + 20.0 * k
        assert state.v_s == 4

    def test_rejection_keeps_newest(self):
        state = EstimatorState()
        state._seen_nonzero = True
        older = msg(1.0, sent_at=0, delivery=38, seq=0)
        newer = msg(2.0, sent_at=20, delivery=39, seq=1)
        rule, accepted = classify_and_measure(state, [older, newer], now=40)
        assert rule is Rule.REJECTION
        assert accepted is newer
        assert state.t_d == 19.0

    def test_receive_resets_vacancy_counter(self):
        state = EstimatorState()
        classify_and_measure(state, [], now=20)
        classify_and_measure(state, [], now=40)
        receive(state, msg(5.0, sent_at=0, delivery=55), now=60)
        assert state.v_s == 1

    def test_startup_zero_payload_counts_as_vacancy(self):
        state = EstimatorState()
        rule, accepted = receive(state, msg(0.0, sent_at=0, delivery=8), now=20)
        assert rule is Rule.VACANT and accepted is None
        assert state.received is False
        # once real data has flowed, a zero payload is a measurement
        receive(state, msg(3.0, sent_at=20, delivery=30), now=40)
        rule, accepted = receive(state, msg(0.0, sent_at=40, delivery=50), now=60)
        assert rule is Rule.NORMAL and accepted is not None

    def test_initial_tm_seeds_vacancy_growth(self):
        state = EstimatorState(initial_tm=60.0)
        classify_and_measure(state, [], now=20)
        assert state.t_m == 80.0


class TestClosedLoopBehavior:
    def _run(self, lo, hi, samples, seed):
        # send every 20 ms; one echo per send, RTT uniform in [lo, hi]
        rng = random.Random(seed)
        state = EstimatorState()
        inflight = []
        history = []
        for n in range(samples):
            now = 20 * n
            due = sorted((m for m in inflight if m.delivery <= now),
                         key=lambda m: (m.delivery, m.seq))
            for m in due:
                inflight.remove(m)
            classify_and_measure(state, due, now)
            on_send(state, now)
            rtt = rng.randint(lo, hi)
            inflight.append(msg(1.0, sent_at=now, delivery=now + rtt, seq=n))
            history.append(state.t_m)
        return history

    def test_constant_subperiod_delay_is_measured_exactly(self):
        state = EstimatorState()
        inflight = []
        values = []
        for n in range(50):
            now = 20 * n
            due = [m for m in inflight if m.delivery <= now]
            inflight = [m for m in inflight if m.delivery > now]
            classify_and_measure(state, due, now)
            on_send(state, now)
            inflight.append(msg(1.0, sent_at=now, delivery=now + 12, seq=n))
            values.append(state.t_m)
        assert all(v == 12.0 for v in values[1:])

    def test_mean_tracks_moderate_jitter(self):
        history = self._run(30, 70, 10_000, seed=9)
        mean = statistics.fmean(history[50:])
        assert 30.0 <= mean <= 70.0 + 20.0

    def test_never_below_true_minimum(self):
        history = self._run(30, 70, 10_000, seed=10)
        assert min(history[50:]) >= 30.0

    def test_vacancy_run_is_nondecreasing(self):
        state = EstimatorState()
        receive(state, msg(5.0, sent_at=0, delivery=15), now=20)
        seen = [state.t_m]
        for k in range(2, 10):
            classify_and_measure(state, [], now=20 * k)
            seen.append(state.t_m)
        assert seen == sorted(seen)
