import random

import pytest

from dagsim import mac
from dagsim.mac import (
    Action, BoMacState, BusyOutcome, DelayBoundState, Poller, StrategyKind,
    bomac_decide, bomac_update, decide_delay_bounded, decide_simple, update_failures,
)


def test_strategy_parse():
    assert StrategyKind.parse("simple") is StrategyKind.SIMPLE_DAG
    assert StrategyKind.parse("DB") is StrategyKind.DELAY_BOUNDED_DAG
    assert StrategyKind.parse("bo_mac") is StrategyKind.BO_MAC
    assert len(StrategyKind) == 3
    with pytest.raises(ValueError, match="unknown strategy"):
        StrategyKind.parse("aloha")


def test_decide_simple_extremes():
    rng = random.Random(0)
    assert all(decide_simple(1.0, rng) is Action.TRANSMIT for _ in range(1000))
    assert all(decide_simple(0.0, rng) is Action.WAIT for _ in range(1000))


def test_decide_simple_frequency():
    rng = random.Random(7)
    n = 10**5
    hits = sum(decide_simple(0.41176, rng) is Action.TRANSMIT for _ in range(n))
    assert abs(hits / n - 0.412) < 0.005


def test_delay_bounded_decisions():
    rng = random.Random(1)
    st = DelayBoundState(0)
    acts = {decide_delay_bounded(st, 0.25, rng) for _ in range(200)}
    assert acts == {Action.TRANSMIT, Action.WAIT}
    assert decide_delay_bounded(DelayBoundState(2), 0.25, rng) is Action.AWAIT_POLL


def test_update_failures():
    assert update_failures(DelayBoundState(0), False).consecutive_failures == 1
    assert update_failures(DelayBoundState(1), False).consecutive_failures == 2
    assert update_failures(DelayBoundState(2), False).consecutive_failures == 2
    # a poll always succeeds and resets the count
    assert update_failures(DelayBoundState(2), True).consecutive_failures == 0


def test_poll_fairness():
    p = Poller(random.Random(3))
    n = 10**4
    first = sum(p.select([0, 1]) == 0 for _ in range(n))
    assert abs(first / n - 0.5) < 0.01


def test_poll_alternating_and_single():
    p = Poller(random.Random(3), alternate=True)
    assert [p.select([0, 1]) for _ in range(4)] == [0, 1, 0, 1]
    assert Poller(random.Random(0)).select([1]) == 1


def test_bomac_fresh_counter_uniform():
    rng = random.Random(11)
    draws = [BoMacState.fresh(rng).backoff_counter for _ in range(32000)]
    assert min(draws) == 0 and max(draws) == 31
    counts = [draws.count(k) for k in range(32)]
    assert max(counts) < 1200 and min(counts) > 800


def test_bomac_decide_and_update():
    rng = random.Random(0)
    st = BoMacState(32, 0)
    assert bomac_decide(st) is Action.TRANSMIT
    bomac_update(st, BusyOutcome.COLLISION, rng)
    assert st.cw == 64 and 0 <= st.backoff_counter < 64
    bomac_update(st, BusyOutcome.SUCCESS, rng)
    assert st.cw == 32 and 0 <= st.backoff_counter < 32
    st = BoMacState(32, 3)
    assert bomac_decide(st) is Action.WAIT
    bomac_update(st, BusyOutcome.IDLE, rng)
    bomac_update(st, BusyOutcome.OTHER_BUSY, rng)
    assert st.backoff_counter == 1


def test_bomac_invariants_random_walk():
    rng = random.Random(5)
    st = BoMacState.fresh(rng)
    outcomes = list(BusyOutcome)
    for _ in range(5000):
        out = rng.choice(outcomes)
        bomac_update(st, out, rng)
        assert st.backoff_counter >= 0
        assert st.cw in (32, 64, 128, 256, 512, 1024)
        if out in (BusyOutcome.SUCCESS, BusyOutcome.COLLISION):
            assert st.backoff_counter < st.cw
        if out is BusyOutcome.SUCCESS:
            assert st.cw == 32
    for _ in range(10):
        bomac_update(st, BusyOutcome.COLLISION, rng)
    assert st.cw == mac.CW_MAX
