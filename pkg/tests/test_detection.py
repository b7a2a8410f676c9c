import pytest
from hypothesis import given, strategies as st

from rankrecovery.cluster import ClusterState, NodeStatus, mark_failed
from rankrecovery.detection import HeartbeatLedger, detect_failures, record_heartbeat
from rankrecovery.errors import UnknownNode


def ledger(**seen):
    return HeartbeatLedger({int(k[1:]): v for k, v in seen.items()}, period=10, miss_threshold=3)


def test_fresh_heartbeat_not_suspected():
    led = record_heartbeat(ledger(P1=0), 1, 50)
    assert detect_failures(led, 50) == frozenset()


def test_out_of_order_heartbeat_ignored():
    led = record_heartbeat(ledger(P1=40), 1, 20)
    assert led.last_seen[1] == 40


def test_heartbeat_from_failed_node_does_not_revive():
    state = mark_failed(ClusterState.from_loads([3, 4]), 1)
    led = record_heartbeat(HeartbeatLedger.register([1, 2]), 1, 5)
    assert led.last_seen[1] == 5
    assert state.node(1).status is NodeStatus.FAILED


def test_unknown_node():
    with pytest.raises(UnknownNode):
        record_heartbeat(ledger(P1=0), 2, 1)
    with pytest.raises(UnknownNode):
        ledger(P1=0).suspect_at(2)


def test_boundary_is_strict():
    led = ledger(P1=0)
    assert detect_failures(led, 31) == {1}
    assert detect_failures(led, 30) == frozenset()
    assert led.suspect_at(1) == 31


def test_all_seen_now():
    led = ledger(P1=7, P2=7, P3=7)
    assert detect_failures(led, 7) == frozenset()


def test_register_defaults():
    led = HeartbeatLedger.register([1, 2, 3], now=4)
    assert dict(led.last_seen) == {1: 4, 2: 4, 3: 4}
    assert (led.period, led.miss_threshold, led.timeout) == (10, 3, 30)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        HeartbeatLedger({}, period=0)


@given(st.integers(0, 100), st.integers(0, 300), st.integers(0, 300))
def test_suspicion_is_monotone(seen, t1, dt):
    led = ledger(P1=seen)
    if 1 in detect_failures(led, t1):
        assert 1 in detect_failures(led, t1 + dt)
    assert detect_failures(led, t1) == detect_failures(led, t1)


@given(st.lists(st.integers(1, 10), min_size=1, max_size=40), st.integers(1, 5), st.integers(1, 20))
def test_timely_heartbeats_never_suspected(gaps, threshold, period):
    led = HeartbeatLedger.register([1], 0, period=period, miss_threshold=threshold)
    now = 0
    for gap in gaps:
        step = 1 + (gap - 1) % period  # every gap <= period
        for t in range(now + 1, now + step + 1):
            assert detect_failures(led, t) == frozenset()
        now += step
        led = record_heartbeat(led, 1, now)
