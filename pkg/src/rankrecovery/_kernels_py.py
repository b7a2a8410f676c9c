"""Pure-Python pairing-pass kernel. Reference semantics for ``_kernels.pyx``."""

from __future__ import annotations

from typing import Sequence

# (pass_index, donor, receiver, avg_load, load_to_transfer, donor_before, receiver_before)
TransferRow = tuple[int, int, int, int, int, int, int]


def redistribute_loads(
    ids: Sequence[int],
    loads: Sequence[int],
    epsilon: int,
    max_passes: int,
) -> tuple[list[int], list[TransferRow], int]:
    """Run pairing passes until spread <= epsilon or max_passes is reached.

    A negative ``epsilon`` forces passes regardless of spread. Returns the
    final loads (aligned with ``ids``), the emitted transfers and the number
    of passes performed.
    """
    cur = list(loads)
    n = len(cur)
    transfers: list[TransferRow] = []
    passes = 0
    if n == 0:
        return cur, transfers, passes
    while passes < max_passes:
        if max(cur) - min(cur) <= epsilon:
            break
        order = sorted(range(n), key=lambda k: (cur[k], ids[k]))
        i, j = 0, n - 1
        while i < j:
            r, d = order[i], order[j]
            hi, lo = cur[d], cur[r]
            if hi - lo > 1:
                avg = (hi + lo) // 2
                amount = hi - avg
                cur[d] = avg
                cur[r] = lo + amount
                transfers.append((passes, ids[d], ids[r], avg, amount, hi, lo))
            i += 1
            j -= 1
        passes += 1
    return cur, transfers, passes
