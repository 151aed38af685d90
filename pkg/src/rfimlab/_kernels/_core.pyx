# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: counter-based hash words and the Dinic max-flow solver.

`_pure.py` is a line-by-line transliteration of this module; both backends
must produce bit-identical outputs (integer hashing is exact, and the flow
solver performs the identical sequence of double-precision operations).
"""

from libc.stdint cimport uint64_t, int64_t, int32_t, uint8_t

cdef uint64_t ADD = 0x9E3779B97F4A7C15
cdef uint64_t M1 = 0xBF58476D1CE4E5B9
cdef uint64_t M2 = 0x94D049BB133111EB
cdef uint64_t C1 = 0xE7037ED1A0B428DB
cdef uint64_t C2 = 0x8EBC6AF09C88C6E3
cdef uint64_t C3 = 0x589965CC75374CC3
cdef uint64_t C4 = 0x1D8E4E27C47D124F

DEF EPS = 1e-12


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = z + ADD
    z = (z ^ (z >> 30)) * M1
    z = (z ^ (z >> 27)) * M2
    return z ^ (z >> 31)


def words_block(uint64_t base, int64_t[::1] xs, int64_t[::1] ys,
                uint64_t[::1] out_a, uint64_t[::1] out_b):
    """Fill out_a/out_b with the two hash words for each (x, y) counter.

    `base` is the pre-mixed seed word (computed by the shared Python layer).
    """
    cdef Py_ssize_t i, n = xs.shape[0]
    cdef uint64_t h
    for i in range(n):
        h = mix64(base ^ (<uint64_t> xs[i] * C1))
        h = mix64(h ^ (<uint64_t> ys[i] * C2))
        out_a[i] = mix64(h ^ C3)
        out_b[i] = mix64(h ^ C4)


def max_flow_side(int32_t[::1] adj_start, int32_t[::1] adj_arc,
                  int32_t[::1] arc_to, int32_t[::1] arc_from,
                  double[::1] cap, int s, int t, uint8_t[::1] side):
    """Dinic max flow; `cap` is consumed in place.

    Returns the flow value and fills `side` with 1 for every node reachable
    from `s` in the final residual graph (the canonical minimum cut side).
    Arcs come in (forward, reverse) pairs at indices (2k, 2k+1).
    """
    cdef Py_ssize_t n = adj_start.shape[0] - 1
    # work arrays (allocation is cheap relative to the solve)
    import numpy as _np
    level_arr = _np.empty(n, dtype=_np.int32)
    it_arr = _np.empty(n, dtype=_np.int32)
    queue_arr = _np.empty(n, dtype=_np.int32)
    path_arr = _np.empty(n + 1, dtype=_np.int32)
    cdef int32_t[::1] lev = level_arr
    cdef int32_t[::1] it = it_arr
    cdef int32_t[::1] queue = queue_arr
    cdef int32_t[::1] path = path_arr

    cdef double total = 0.0, bn
    cdef Py_ssize_t u, v, w, qh, qt, idx, a, plen, j, k

    while True:
        # BFS: build level graph over residual arcs
        for u in range(n):
            lev[u] = -1
        lev[s] = 0
        queue[0] = s
        qh = 0
        qt = 1
        while qh < qt:
            u = queue[qh]
            qh += 1
            for idx in range(adj_start[u], adj_start[u + 1]):
                a = adj_arc[idx]
                v = arc_to[a]
                if cap[a] > EPS and lev[v] < 0:
                    lev[v] = lev[u] + 1
                    queue[qt] = v
                    qt += 1
        if lev[t] < 0:
            break
        for u in range(n):
            it[u] = adj_start[u]
        # blocking flow: iterative DFS with current-arc pointers
        plen = 0
        v = s
        while True:
            if v == t:
                bn = cap[path[0]]
                for j in range(1, plen):
                    if cap[path[j]] < bn:
                        bn = cap[path[j]]
                for j in range(plen):
                    a = path[j]
                    cap[a] -= bn
                    cap[a ^ 1] += bn
                total += bn
                k = 0
                while k < plen and cap[path[k]] > EPS:
                    k += 1
                plen = k
                v = arc_from[path[k]]
            elif it[v] == adj_start[v + 1]:
                if v == s:
                    break
                lev[v] = -1
                plen -= 1
                a = path[plen]
                v = arc_from[a]
                it[v] += 1
            else:
                a = adj_arc[it[v]]
                w = arc_to[a]
                if cap[a] > EPS and lev[w] == lev[v] + 1:
                    path[plen] = a
                    plen += 1
                    v = w
                else:
                    it[v] += 1

    # residual reachability from s -> minimum cut side
    for u in range(n):
        side[u] = 0
    side[s] = 1
    queue[0] = s
    qh = 0
    qt = 1
    while qh < qt:
        u = queue[qh]
        qh += 1
        for idx in range(adj_start[u], adj_start[u + 1]):
            a = adj_arc[idx]
            v = arc_to[a]
            if cap[a] > EPS and side[v] == 0:
                side[v] = 1
                queue[qt] = v
                qt += 1
    return total
