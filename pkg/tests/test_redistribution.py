from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from rankrecovery.cluster import ClusterState, mark_failed, total_alive_load
from rankrecovery.errors import NoAliveNodes, NotConverged
from rankrecovery.oracles import reference_redistribute, uniform_target
from rankrecovery.redistribution import (
    Transfer,
    default_max_passes,
    message_count,
    pairing_pass,
    redistribute,
)


def loads_of(state):
    return [n.load for n in state.nodes]


def level_pair(donor, receiver):
    """Hand application of the two transfer formulas."""
    avg = (donor + receiver) // 2
    move = donor - avg
    return avg, move, receiver + move


def test_level_pair_oracle_values():
    assert level_pair(900, 137) == (518, 382, 519)
    assert level_pair(9, 1) == (5, 4, 5)


def test_two_nodes(backend):
    state, transfers = pairing_pass(ClusterState.from_loads([137, 900]))
    assert transfers == [Transfer(2, 1, 518, 382, 0, 900, 137)]
    assert loads_of(state) == [519, 518]
    assert loads_of(state) == reference_redistribute([137, 900])


def test_four_nodes_one_pass(backend):
    state, transfers = pairing_pass(ClusterState.from_loads([100, 200, 300, 400]))
    assert loads_of(state) == [250, 250, 250, 250]
    assert [(t.donor, t.receiver) for t in transfers] == [(4, 1), (3, 2)]
    assert sum(t.load_to_transfer for t in transfers) == 200


def test_uniform_input_no_transfers(backend):
    state = ClusterState.from_loads([10, 10, 10, 10])
    after, transfers = pairing_pass(state)
    assert transfers == []
    assert after == state


def test_odd_middle_untouched(backend):
    after, transfers = pairing_pass(ClusterState.from_loads([1, 2, 9]))
    assert loads_of(after) == [5, 2, 5]
    assert len(transfers) == 1


def test_pairs_within_one_are_skipped(backend):
    # a 1-unit move would only swap which node holds the extra unit
    after, transfers = pairing_pass(ClusterState.from_loads([5, 6]))
    assert transfers == []
    assert loads_of(after) == [5, 6]


def test_strongest_allocation(backend):
    state, report = redistribute(ClusterState.from_loads([0, 0, 69, 70]), epsilon=1)
    assert report.passes == 1
    assert sorted(loads_of(state)) == [34, 35, 35, 35]
    assert total_alive_load(state) == 139
    assert report.converged and report.final_spread == 1
    assert report.messages == 2 * 2 + 4 * 1


def test_already_uniform_zero_passes(backend):
    state = ClusterState.from_loads([3, 4, 3])
    after, report = redistribute(state)
    assert (report.passes, report.transfers, report.messages) == (0, (), 0)
    assert after == state


def test_failed_nodes_and_queues_left_alone(backend):
    state = mark_failed(ClusterState.from_loads([0, 50, 100, 7]), 4)
    after, _ = redistribute(state)
    assert after.failure_queue == state.failure_queue
    assert after.node(4) == state.node(4)
    assert sorted(loads_of(after)[:3]) == [50, 50, 50]


def test_not_converged_reported_and_strict():
    state = ClusterState.from_loads([0, 0, 1_000_000])
    after, report = redistribute(state, max_passes=3)
    assert not report.converged
    assert report.passes == 3
    with pytest.raises(NotConverged) as exc:
        redistribute(state, max_passes=3, strict=True)
    assert exc.value.report == report


def test_default_budget_covers_three_node_halving(backend):
    state = ClusterState.from_loads([0, 0, 1_000_000])
    assert default_max_passes(state) == 20
    _, report = redistribute(state)
    assert report.converged


def test_argument_checks():
    state = ClusterState.from_loads([1, 2])
    with pytest.raises(ValueError):
        redistribute(state, epsilon=0)
    with pytest.raises(ValueError):
        redistribute(state, max_passes=0)
    with pytest.raises(NoAliveNodes):
        redistribute(ClusterState(()))


def test_message_count_examples():
    t = Transfer(2, 1, 518, 382, 0, 900, 137)
    assert message_count([t], 1, 2) == 4
    assert message_count([], 0, 5) == 0
    assert message_count([t, t._replace(donor=3, receiver=4)], 1, 4) == 8


def test_structured_jobs_survive_redistribution(backend):
    state = ClusterState.from_loads([0, 12], jobs={2: [4, 4, 4]})
    after, _ = redistribute(state)
    assert after.node(2).pieces == (4, 2)
    assert after.node(1).load == 6


loads_strategy = st.lists(st.integers(0, 10**6), min_size=1, max_size=40)


@settings(max_examples=200)
@given(loads_strategy)
def test_pass_properties(loads):
    state = ClusterState.from_loads(loads)
    total = sum(loads)
    spread = max(loads) - min(loads)
    for _ in range(25):
        before = {n.id: n.load for n in state.nodes}
        state, transfers = pairing_pass(state)
        cur = loads_of(state)
        assert sum(cur) == total
        assert min(cur) >= 0
        new_spread = max(cur) - min(cur)
        assert new_spread <= spread
        spread = new_spread
        for t in transfers:
            assert t.donor_before == before[t.donor]
            assert t.receiver_before == before[t.receiver]
            assert t.avg_load == (t.donor_before + t.receiver_before) // 2
            assert t.load_to_transfer == t.donor_before - t.avg_load
            assert abs(t.donor_after - t.receiver_after) <= 1
            assert t.donor_before >= t.receiver_before
        if spread <= 1:
            break


@settings(max_examples=200)
@given(loads_strategy)
def test_converged_shape_and_fixpoint(loads):
    state, report = redistribute(ClusterState.from_loads(loads), max_passes=1000)
    assert report.converged
    floor_avg, extra = uniform_target(loads)
    assert Counter(loads_of(state)) == Counter({floor_avg + 1: extra, floor_avg: len(loads) - extra}) - Counter()
    assert loads_of(state) == reference_redistribute(loads)
    again, report2 = redistribute(state)
    assert report2.transfers == () and again == state
