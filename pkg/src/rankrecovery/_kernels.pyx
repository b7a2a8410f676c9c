# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pairing-pass kernel; must match ``_kernels_py`` exactly."""

from libc.stdlib cimport malloc, free, qsort

cdef long long LOAD_LIMIT = 1LL << 61


cdef struct Slot:
    long long load
    long long id
    Py_ssize_t pos


cdef int _cmp(const void* a, const void* b) noexcept nogil:
    cdef const Slot* x = <const Slot*>a
    cdef const Slot* y = <const Slot*>b
    if x.load != y.load:
        return -1 if x.load < y.load else 1
    if x.id != y.id:
        return -1 if x.id < y.id else 1
    return 0


def redistribute_loads(ids, loads, long long epsilon, long long max_passes):
    cdef Py_ssize_t n = len(loads)
    cdef Py_ssize_t k, i, j
    cdef long long hi, lo, avg, amount, mn, mx
    cdef long long passes = 0
    cdef list transfers = []
    if n == 0:
        return [], transfers, 0
    cdef long long* cur = <long long*>malloc(n * sizeof(long long))
    cdef long long* nid = <long long*>malloc(n * sizeof(long long))
    cdef Slot* order = <Slot*>malloc(n * sizeof(Slot))
    if cur == NULL or nid == NULL or order == NULL:
        free(cur); free(nid); free(order)
        raise MemoryError()
    try:
        for k in range(n):
            cur[k] = loads[k]
            nid[k] = ids[k]
            if cur[k] > LOAD_LIMIT or cur[k] < 0:
                raise OverflowError("load outside kernel range")
        while passes < max_passes:
            mn = cur[0]
            mx = cur[0]
            for k in range(1, n):
                if cur[k] < mn:
                    mn = cur[k]
                elif cur[k] > mx:
                    mx = cur[k]
            if mx - mn <= epsilon:
                break
            for k in range(n):
                order[k].load = cur[k]
                order[k].id = nid[k]
                order[k].pos = k
            qsort(order, n, sizeof(Slot), _cmp)
            i = 0
            j = n - 1
            while i < j:
                hi = cur[order[j].pos]
                lo = cur[order[i].pos]
                if hi - lo > 1:
                    avg = (hi + lo) // 2
                    amount = hi - avg
                    cur[order[j].pos] = avg
                    cur[order[i].pos] = lo + amount
                    transfers.append(
                        (passes, order[j].id, order[i].id, avg, amount, hi, lo)
                    )
                i += 1
                j -= 1
            passes += 1
        return [cur[k] for k in range(n)], transfers, passes
    finally:
        free(cur)
        free(nid)
        free(order)
