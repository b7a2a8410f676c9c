"""Cluster domain types and their legal state transitions.

Every transition is a pure function: it takes a :class:`ClusterState` and
returns a new one. Nothing in this module mutates a state in place.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import AlreadyFailed, InvalidSize, NoAliveNodes, UnknownNode


class NodeStatus(str, Enum):
    ALIVE = "alive"
    FAILED = "failed"


class Origin(str, Enum):
    """Where a reassignable job came from."""

    INITIAL = "initial"
    FAILURE_RECOVERED = "failure_recovered"
    NEW_ARRIVAL = "new_arrival"


@dataclass(frozen=True, slots=True)
class Job:
    id: int
    size: int
    origin: Origin
    source: int | None = None  # failed node for FAILURE_RECOVERED jobs
    enqueued_at: int = 0

    def __post_init__(self) -> None:
        if self.size < 1:
            raise InvalidSize(f"job size must be >= 1, got {self.size}")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "size": self.size,
            "origin": self.origin.value,
            "source": self.source,
            "enqueued_at": self.enqueued_at,
        }


@dataclass(frozen=True, slots=True)
class ComputeNode:
    """One cluster node.

    ``pieces`` optionally records the job structure of the remaining load
    (sizes in processing order). An empty tuple means the load is an
    unstructured mass; otherwise ``sum(pieces) == load``.
    """

    id: int
    load: int
    status: NodeStatus = NodeStatus.ALIVE
    pieces: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.load < 0:
            raise ValueError(f"P{self.id}: load must be >= 0, got {self.load}")
        if self.pieces and sum(self.pieces) != self.load:
            raise ValueError(f"P{self.id}: job pieces do not sum to load")

    @property
    def alive(self) -> bool:
        return self.status is NodeStatus.ALIVE

    def with_delta(self, delta: int) -> ComputeNode:
        """Return a copy whose load changed by ``delta``.

        Outgoing work leaves from the tail of the job list, incoming work is
        appended as one new piece; processing consumes from the head (see
        :meth:`processed`).
        """
        if delta == 0:
            return self
        load = self.load + delta
        if load < 0:
            raise ValueError(f"P{self.id}: load would become negative")
        if not self.pieces:
            return replace(self, load=load)
        if delta > 0:
            return replace(self, load=load, pieces=self.pieces + (delta,))
        return replace(self, load=load, pieces=_take_tail(self.pieces, -delta))

    def processed(self, units: int) -> ComputeNode:
        """Return a copy with ``units`` of work completed from the head."""
        if units == 0:
            return self
        if units > self.load:
            raise ValueError(f"P{self.id}: cannot process {units} of {self.load}")
        pieces = _consume_head(self.pieces, units) if self.pieces else ()
        return replace(self, load=self.load - units, pieces=pieces)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "load": self.load,
            "status": self.status.value,
            "pieces": list(self.pieces),
        }


def _take_tail(pieces: tuple[int, ...], amount: int) -> tuple[int, ...]:
    out = list(pieces)
    while amount:
        if out[-1] <= amount:
            amount -= out.pop()
        else:
            out[-1] -= amount
            amount = 0
    return tuple(out)


def _consume_head(pieces: tuple[int, ...], amount: int) -> tuple[int, ...]:
    k = 0
    while amount and pieces[k] <= amount:
        amount -= pieces[k]
        k += 1
    rest = list(pieces[k:])
    if amount:
        rest[0] -= amount
    return tuple(rest)


@dataclass(frozen=True, slots=True)
class ClusterState:
    nodes: tuple[ComputeNode, ...]
    failure_queue: tuple[Job, ...] = ()
    arrival_queue: tuple[Job, ...] = ()
    clock: int = 0
    next_job_id: int = 1
    next_seq: int = 0

    def __post_init__(self) -> None:
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("node ids must be unique")

    @classmethod
    def from_loads(
        cls,
        loads: Sequence[int],
        jobs: Mapping[int, Sequence[int]] | None = None,
        first_id: int = 1,
    ) -> ClusterState:
        """Build an all-alive cluster; node ``first_id + k`` gets ``loads[k]``.

        ``jobs`` maps a node id to its explicit job sizes, which must sum to
        that node's load.
        """
        jobs = jobs or {}
        nodes = []
        for k, load in enumerate(loads):
            nid = first_id + k
            nodes.append(ComputeNode(nid, int(load), pieces=tuple(jobs.get(nid, ()))))
        return cls(tuple(nodes))

    def index_of(self, node: int) -> int:
        for k, n in enumerate(self.nodes):
            if n.id == node:
                return k
        raise UnknownNode(node)

    def node(self, node: int) -> ComputeNode:
        return self.nodes[self.index_of(node)]

    def alive_nodes(self) -> tuple[ComputeNode, ...]:
        return tuple(n for n in self.nodes if n.alive)

    def loads(self) -> dict[int, int]:
        """Alive node id -> load."""
        return {n.id: n.load for n in self.nodes if n.alive}

    def with_deltas(self, deltas: Mapping[int, int]) -> ClusterState:
        if not deltas:
            return self
        nodes = tuple(n.with_delta(deltas[n.id]) if n.id in deltas else n for n in self.nodes)
        unknown = set(deltas) - {n.id for n in self.nodes}
        if unknown:
            raise UnknownNode(min(unknown))
        return replace(self, nodes=nodes)

    def replace_node(self, new: ComputeNode) -> ClusterState:
        k = self.index_of(new.id)
        return replace(self, nodes=self.nodes[:k] + (new,) + self.nodes[k + 1 :])

    def to_dict(self) -> dict:
        return {
            "nodes": [n.to_dict() for n in self.nodes],
            "failure_queue": [j.to_dict() for j in self.failure_queue],
            "arrival_queue": [j.to_dict() for j in self.arrival_queue],
            "clock": self.clock,
            "next_job_id": self.next_job_id,
            "next_seq": self.next_seq,
        }


def mark_failed(state: ClusterState, node: int) -> ClusterState:
    """Fail ``node`` and move its remaining work onto the failure queue.

    Structured load becomes one job per remaining piece, unstructured load a
    single job of the full amount. A node with zero load adds nothing.

    Raises:
        UnknownNode: ``node`` is not in the cluster.
        AlreadyFailed: ``node`` was failed earlier.
    """
    target = state.node(node)
    if not target.alive:
        raise AlreadyFailed(node)
    sizes: Iterable[int] = target.pieces if target.pieces else ((target.load,) if target.load else ())
    next_id = state.next_job_id
    recovered = []
    for size in sizes:
        recovered.append(
            Job(next_id, size, Origin.FAILURE_RECOVERED, source=node, enqueued_at=state.clock)
        )
        next_id += 1
    failed = ComputeNode(node, 0, NodeStatus.FAILED)
    return replace(
        state.replace_node(failed),
        failure_queue=state.failure_queue + tuple(recovered),
        next_job_id=next_id,
    )


def total_alive_load(state: ClusterState) -> int:
    return sum(n.load for n in state.nodes if n.alive)


def imbalance(state: ClusterState) -> tuple[int, float]:
    """Spread (max - min) and population standard deviation of alive loads."""
    loads = [n.load for n in state.nodes if n.alive]
    if not loads:
        raise NoAliveNodes("imbalance needs at least one alive node")
    return max(loads) - min(loads), statistics.pstdev(loads)
