"""Load-ordered rank table over alive nodes.

Rank 1 is the least loaded node and rank N (``last``) the most loaded.
Equal loads are ordered by ascending node id so that every table, and every
simulation built on top of one, is reproducible.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterator, NamedTuple

from .cluster import ClusterState
from .errors import EmptyTable, NoAliveNodes, UnknownNode


class RankEntry(NamedTuple):
    rank: int
    node: int
    load: int


@dataclass(frozen=True, slots=True)
class RankTable:
    entries: tuple[RankEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[RankEntry]:
        return iter(self.entries)

    @property
    def last(self) -> int:
        """Highest rank in the table (the number of ranked nodes)."""
        return len(self.entries)

    def loads(self) -> dict[int, int]:
        return {e.node: e.load for e in self.entries}

    def rank_of(self, node: int) -> int:
        for e in self.entries:
            if e.node == node:
                return e.rank
        raise UnknownNode(node)

    def to_list(self) -> list[list[int]]:
        return [list(e) for e in self.entries]


def _from_pairs(pairs: list[tuple[int, int]]) -> RankTable:
    # pairs: (load, node), already sorted
    return RankTable(tuple(RankEntry(r, node, load) for r, (load, node) in enumerate(pairs, 1)))


def build_rank_table(state: ClusterState) -> RankTable:
    """Rank the alive nodes of ``state`` by load.

    Raises:
        NoAliveNodes: every node has failed (or the cluster is empty).
    """
    pairs = sorted((n.load, n.id) for n in state.nodes if n.alive)
    if not pairs:
        raise NoAliveNodes("cannot rank a cluster with no alive nodes")
    return _from_pairs(pairs)


def get_least_rank_node(table: RankTable) -> int:
    if not table.entries:
        raise EmptyTable("rank table is empty")
    return table.entries[0].node


def update_after_assignment(table: RankTable, node: int, delta: int) -> RankTable:
    """Add ``delta`` to ``node``'s load and restore rank order.

    Equivalent to rebuilding the table from the updated cluster state, but
    only moves the one entry that changed.
    """
    if delta < 1:
        raise ValueError(f"delta must be positive, got {delta}")
    pairs = [(e.load, e.node) for e in table.entries]
    for k, (load, nid) in enumerate(pairs):
        if nid == node:
            break
    else:
        raise UnknownNode(node)
    del pairs[k]
    moved = (load + delta, node)
    # load only grows, so the new slot is at or after k
    pairs.insert(bisect_left(pairs, moved, lo=k), moved)
    return _from_pairs(pairs)
