"""Phase 1 recovery: rank-paired load leveling across alive nodes.

Each pass ranks the alive nodes and pairs rank 1 with rank N, rank 2 with
rank N-1 and so on. Within a pair the donor (higher load) keeps the floor of
the pair average and hands the rest to the receiver, so every pair ends
within one unit. Passes repeat, re-ranking each time, until the spread is at
most ``epsilon``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

from . import kernels
from .cluster import ClusterState
from .errors import NoAliveNodes, NotConverged


class Transfer(NamedTuple):
    donor: int
    receiver: int
    avg_load: int
    load_to_transfer: int
    pass_index: int
    donor_before: int
    receiver_before: int

    @property
    def donor_after(self) -> int:
        return self.avg_load

    @property
    def receiver_after(self) -> int:
        return self.receiver_before + self.load_to_transfer

    def to_dict(self) -> dict:
        return self._asdict()


@dataclass(frozen=True)
class RedistributionReport:
    passes: int
    transfers: tuple[Transfer, ...]
    messages: int
    final_spread: int
    total_moved: int
    converged: bool = True

    def to_dict(self) -> dict:
        return {
            "passes": self.passes,
            "transfers": [t.to_dict() for t in self.transfers],
            "messages": self.messages,
            "final_spread": self.final_spread,
            "total_moved": self.total_moved,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, data: dict) -> RedistributionReport:
        return cls(
            passes=data["passes"],
            transfers=tuple(Transfer(**t) for t in data["transfers"]),
            messages=data["messages"],
            final_spread=data["final_spread"],
            total_moved=data["total_moved"],
            converged=data["converged"],
        )


def message_count(transfers: Sequence[Transfer], passes: int, n_alive: int) -> int:
    """Two messages per nonzero transfer plus one load report per node per pass."""
    moved = sum(1 for t in transfers if t.load_to_transfer)
    return 2 * moved + n_alive * passes


def default_max_passes(state: ClusterState) -> int:
    """Pass budget used when none is given.

    The alive node count alone is too small: three nodes loaded (0, 0, M)
    halve their spread once per pass and need about log2(M) passes. Observed
    pass counts never exceed the bit length of the initial spread, so the
    budget is the larger of the two.
    """
    loads = [n.load for n in state.nodes if n.alive]
    if not loads:
        return 1
    return max(len(loads), (max(loads) - min(loads)).bit_length(), 1)


def _run(state: ClusterState, epsilon: int, max_passes: int):
    alive = state.alive_nodes()
    if not alive:
        raise NoAliveNodes("redistribution needs at least one alive node")
    ids = [n.id for n in alive]
    before = [n.load for n in alive]
    after, rows, passes = kernels.redistribute_loads(ids, before, epsilon, max_passes)
    deltas = {nid: a - b for nid, a, b in zip(ids, after, before) if a != b}
    transfers = [Transfer(d, r, avg, amt, p, db, rb) for p, d, r, avg, amt, db, rb in rows]
    return state.with_deltas(deltas), transfers, passes, len(alive), max(after) - min(after)


def pairing_pass(state: ClusterState) -> tuple[ClusterState, list[Transfer]]:
    """Run exactly one pairing pass. Pairs already within one unit are skipped."""
    new_state, transfers, _, _, _ = _run(state, -1, 1)
    return new_state, transfers


def redistribute(
    state: ClusterState,
    epsilon: int = 1,
    max_passes: int | None = None,
    *,
    strict: bool = False,
) -> tuple[ClusterState, RedistributionReport]:
    """Level alive loads until the spread is at most ``epsilon``.

    Args:
        state: Cluster to balance. Queues and failed nodes are left alone.
        epsilon: Target spread, at least 1.
        max_passes: Pass budget; defaults to :func:`default_max_passes`.
        strict: Raise :class:`NotConverged` instead of only flagging it in
            the report.

    Returns:
        The balanced state and a report of passes, transfers and messages.
    """
    if epsilon < 1:
        raise ValueError(f"epsilon must be >= 1, got {epsilon}")
    if max_passes is None:
        max_passes = default_max_passes(state)
    if max_passes < 1:
        raise ValueError(f"max_passes must be >= 1, got {max_passes}")
    new_state, transfers, passes, n_alive, spread = _run(state, epsilon, max_passes)
    report = RedistributionReport(
        passes=passes,
        transfers=tuple(transfers),
        messages=message_count(transfers, passes, n_alive),
        final_spread=spread,
        total_moved=sum(t.load_to_transfer for t in transfers),
        converged=spread <= epsilon,
    )
    if strict and not report.converged:
        raise NotConverged(new_state, report)
    return new_state, report
