"""Heartbeat-timeout failure detector.

A node is suspected once ``now - last_seen > miss_threshold * period``.
The inequality is strict: a node silent for exactly the timeout is still
trusted.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import UnknownNode

DEFAULT_PERIOD = 10
DEFAULT_MISS_THRESHOLD = 3


@dataclass(frozen=True)
class HeartbeatLedger:
    last_seen: Mapping[int, int] = field(default_factory=dict)
    period: int = DEFAULT_PERIOD
    miss_threshold: int = DEFAULT_MISS_THRESHOLD

    def __post_init__(self) -> None:
        if self.period < 1 or self.miss_threshold < 1:
            raise ValueError("period and miss_threshold must be positive")
        object.__setattr__(self, "last_seen", MappingProxyType(dict(self.last_seen)))

    @classmethod
    def register(
        cls,
        nodes: Iterable[int],
        now: int = 0,
        period: int = DEFAULT_PERIOD,
        miss_threshold: int = DEFAULT_MISS_THRESHOLD,
    ) -> HeartbeatLedger:
        """Ledger for ``nodes``, all considered seen at ``now``."""
        return cls({n: now for n in nodes}, period, miss_threshold)

    @property
    def timeout(self) -> int:
        return self.period * self.miss_threshold

    def suspect_at(self, node: int) -> int:
        """First tick at which ``node`` is suspected if it stays silent."""
        try:
            return self.last_seen[node] + self.timeout + 1
        except KeyError:
            raise UnknownNode(node) from None


def record_heartbeat(ledger: HeartbeatLedger, node: int, now: int) -> HeartbeatLedger:
    if node not in ledger.last_seen:
        raise UnknownNode(node)
    if now <= ledger.last_seen[node]:
        return ledger
    seen = dict(ledger.last_seen)
    seen[node] = now
    return replace(ledger, last_seen=seen)


def detect_failures(ledger: HeartbeatLedger, now: int) -> frozenset[int]:
    limit = ledger.timeout
    return frozenset(n for n, seen in ledger.last_seen.items() if now - seen > limit)
