# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled difference-bound kernel; same contract as ``_dbm_py``."""
from libc.stdlib cimport malloc, free

cdef long long INF = 1LL << 62
cdef long long LE_ZERO = 1
cdef long long LT_ZERO = 0


cdef inline long long _add(long long a, long long b) nogil:
    if a >= INF or b >= INF:
        return INF
    return ((a >> 1) + (b >> 1)) * 2 + (a & b & 1)


cdef bint _close(long long* d, int n) nogil:
    cdef int i, j, k
    cdef long long dik, dkj, s
    for k in range(n):
        for i in range(n):
            dik = d[i * n + k]
            if dik >= INF:
                continue
            for j in range(n):
                dkj = d[k * n + j]
                if dkj >= INF:
                    continue
                s = ((dik >> 1) + (dkj >> 1)) * 2 + (dik & dkj & 1)
                if s < d[i * n + j]:
                    d[i * n + j] = s
        if d[k * n + k] < 1:
            return False
    for i in range(n):
        if d[i * n + i] < 1:
            return False
    return True


cdef long long* _load(tuple dom, int size) except NULL:
    cdef long long* d = <long long*> malloc(size * sizeof(long long))
    if d == NULL:
        raise MemoryError()
    cdef int i
    for i in range(size):
        d[i] = dom[i]
    return d


cdef tuple _dump(long long* d, int size):
    return tuple([d[i] for i in range(size)])


def add(long long a, long long b):
    return _add(a, b)


def encode(long long c, bint strict):
    return 2 * c + (0 if strict else 1)


def canonical(tuple dom, int n):
    cdef long long* d = _load(dom, n * n)
    cdef bint ok
    try:
        ok = _close(d, n)
        return _dump(d, n * n) if ok else None
    finally:
        free(d)


def fire_domain(tuple dom, int n, int a, doms):
    cdef long long* d = _load(dom, n * n)
    cdef int u, base = a * n
    cdef bint ok
    try:
        for u in range(1, n):
            if u != a and d[base + u] > LE_ZERO:
                d[base + u] = LE_ZERO
        for h in doms:
            if d[base + <int> h] > LT_ZERO:
                d[base + <int> h] = LT_ZERO
        ok = _close(d, n)
        return _dump(d, n * n) if ok else None
    finally:
        free(d)


def successor(tuple dom, int n, int a, keep, los, his):
    cdef int m = len(keep) + 1
    cdef int i, j, k, v, oi, oj
    cdef long long up, lo
    cdef long long* out = <long long*> malloc(m * m * sizeof(long long))
    cdef int* old = <int*> malloc(m * sizeof(int))
    if out == NULL or old == NULL:
        free(out)
        free(old)
        raise MemoryError()
    try:
        old[0] = a
        for k in range(m - 1):
            old[k + 1] = keep[k]
        for i in range(m):
            oi = old[i]
            for j in range(m):
                oj = old[j]
                if i == j:
                    out[i * m + j] = 1
                elif oi >= 0 and oj >= 0:
                    out[i * m + j] = dom[oi * n + oj]
                else:
                    out[i * m + j] = INF
        for k in range(m - 1):
            if old[k + 1] < 0:
                v = k + 1
                out[v * m] = his[k]
                out[v] = los[k]
        for k in range(m - 1):
            if old[k + 1] < 0:
                v = k + 1
                up = out[v * m]
                lo = out[v]
                for j in range(1, m):
                    if j == v:
                        continue
                    out[v * m + j] = _add(up, out[j])
                    out[j * m + v] = _add(out[j * m], lo)
        return _dump(out, m * m)
    finally:
        free(out)
        free(old)


def initial_domain(los, his):
    return successor((1,), 1, 0, [-1] * len(los), los, his)
