"""Brute-force and naive reference computations for differential testing.

Nothing here imports the modules it is used to check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import InstanceTooLarge

MAX_JOBS = 12
MAX_MACHINES = 4


@dataclass(frozen=True)
class PartitionInstance:
    job_sizes: tuple[int, ...]
    machines: int

    def __post_init__(self) -> None:
        if self.machines < 1:
            raise ValueError("need at least one machine")
        if any(s < 1 for s in self.job_sizes):
            raise ValueError("job sizes must be positive")


def brute_force_optimal_makespan(instance: PartitionInstance) -> int:
    """Smallest achievable max machine load over every m-way assignment.

    Exhaustive depth-first search. Machines holding equal loads are
    interchangeable, so only one of them is tried per job; that prunes
    permutations without skipping any distinct partition.
    """
    sizes = sorted(instance.job_sizes, reverse=True)
    m = instance.machines
    if len(sizes) > MAX_JOBS or m > MAX_MACHINES:
        raise InstanceTooLarge(
            f"{len(sizes)} jobs on {m} machines exceeds {MAX_JOBS} jobs / {MAX_MACHINES} machines"
        )
    if not sizes:
        return 0
    best = sum(sizes)
    loads = [0] * m

    def search(k: int, current_max: int) -> None:
        nonlocal best
        if current_max >= best:
            return
        if k == len(sizes):
            best = current_max
            return
        tried = set()
        for i in range(m):
            if loads[i] in tried:
                continue
            tried.add(loads[i])
            loads[i] += sizes[k]
            search(k + 1, max(current_max, loads[i]))
            loads[i] -= sizes[k]

    search(0, 0)
    return best


def greedy_makespan(job_sizes: Sequence[int], machines: int) -> int:
    """List scheduling: each job in order onto the lowest-index least-loaded machine."""
    loads = [0] * machines
    for size in job_sizes:
        loads[loads.index(min(loads))] += size
    return max(loads)


def reference_redistribute(loads: Sequence[int], max_passes: int | None = None) -> list[int]:
    """Naive pairing passes until the spread is at most one.

    Node k is identified by its position; ties in load rank the lower
    position first. Each pass re-sorts everything from scratch and levels
    pairs (1, N), (2, N-1), ... whose loads differ by more than one.
    """
    cur = list(loads)
    passes = 0
    while cur and max(cur) - min(cur) > 1:
        if max_passes is not None and passes >= max_passes:
            break
        ranked = sorted(zip(cur, range(len(cur))))
        for low, high in zip(ranked, reversed(ranked)):
            (lo, r), (hi, d) = low, high
            if r == d or (lo, r) > (hi, d):
                break
            if hi - lo > 1:
                cur[d] = (hi + lo) // 2
                cur[r] = lo + hi - cur[d]
        passes += 1
    return cur


def uniform_target(loads: Sequence[int]) -> tuple[int, int]:
    """(floor of the mean, number of nodes that must hold one extra unit)."""
    if not loads:
        raise ValueError("uniform_target needs at least one load")
    return divmod(sum(loads), len(loads))
