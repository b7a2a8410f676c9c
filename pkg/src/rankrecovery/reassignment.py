"""Phase 2 recovery: drain queued jobs onto the least-loaded alive node."""

from __future__ import annotations

from dataclasses import replace
from enum import Enum
from typing import NamedTuple

from .cluster import ClusterState, Job, Origin
from .errors import InvalidSize, NoAliveNodes
from .ranking import RankTable, get_least_rank_node, update_after_assignment


class QueuePolicy(str, Enum):
    FAILURE_FIRST = "failure_first"
    FIFO = "fifo"  # by enqueue tick across both queues


class Assignment(NamedTuple):
    job: int
    node: int
    node_load_before: int
    node_load_after: int
    seq: int

    def to_dict(self) -> dict:
        return self._asdict()


def pending_jobs(state: ClusterState, policy: QueuePolicy = QueuePolicy.FAILURE_FIRST) -> list[Job]:
    """Queued jobs in the order they will be drained."""
    if QueuePolicy(policy) is QueuePolicy.FAILURE_FIRST:
        return list(state.failure_queue) + list(state.arrival_queue)
    return sorted(state.failure_queue + state.arrival_queue, key=lambda j: (j.enqueued_at, j.id))


def allocate_pending_jobs(
    state: ClusterState,
    table: RankTable,
    policy: QueuePolicy = QueuePolicy.FAILURE_FIRST,
) -> tuple[ClusterState, RankTable, list[Assignment]]:
    """Assign every queued job, one at a time, to the current rank-1 node.

    ``table`` must rank exactly the alive loads of ``state``; it is updated
    after every assignment, so the returned table matches the returned state.
    Both queues are empty afterwards.

    Raises:
        NoAliveNodes: jobs are pending but no node is alive. The state is
            left untouched, so the jobs stay queued.
    """
    jobs = pending_jobs(state, policy)
    if not jobs:
        return state, table, []
    if not state.alive_nodes():
        raise NoAliveNodes(f"{len(jobs)} jobs pending with no alive node")
    if table.loads() != state.loads():
        raise ValueError("rank table does not match the cluster's alive loads")

    seq = state.next_seq
    assignments = []
    received: dict[int, list[int]] = {}
    for job in jobs:
        node = get_least_rank_node(table)
        before = table.entries[0].load
        table = update_after_assignment(table, node, job.size)
        assignments.append(Assignment(job.id, node, before, before + job.size, seq))
        received.setdefault(node, []).append(job.size)
        seq += 1

    nodes = list(state.nodes)
    for k, n in enumerate(nodes):
        for size in received.get(n.id, ()):
            n = n.with_delta(size)
        nodes[k] = n
    new_state = replace(
        state,
        nodes=tuple(nodes),
        failure_queue=(),
        arrival_queue=(),
        next_seq=seq,
    )
    return new_state, table, assignments


def enqueue_arrival(state: ClusterState, size: int, time: int) -> ClusterState:
    """Queue a new job; it is placed only by :func:`allocate_pending_jobs`."""
    if not isinstance(size, int) or size < 1:
        raise InvalidSize(f"arrival size must be a positive integer, got {size!r}")
    job = Job(state.next_job_id, size, Origin.NEW_ARRIVAL, enqueued_at=time)
    return replace(
        state,
        arrival_queue=state.arrival_queue + (job,),
        next_job_id=state.next_job_id + 1,
    )
