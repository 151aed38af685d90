"""Fallback kernels: same semantics as the compiled `_core` extension.

The hash pipeline is vectorized with numpy uint64 arithmetic (wraparound
matches C), and the flow solver is a line-by-line transliteration of the
Cython one, so both backends produce bit-identical outputs.
"""

import numpy as np

_ADD = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_C1 = np.uint64(0xE7037ED1A0B428DB)
_C2 = np.uint64(0x8EBC6AF09C88C6E3)
_C3 = np.uint64(0x589965CC75374CC3)
_C4 = np.uint64(0x1D8E4E27C47D124F)

_EPS = 1e-12


def _mix64(z):
    z = z + _ADD
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def words_block(base, xs, ys, out_a, out_b):
    ux = np.asarray(xs, dtype=np.int64).astype(np.uint64)
    uy = np.asarray(ys, dtype=np.int64).astype(np.uint64)
    h = _mix64(np.uint64(base) ^ (ux * _C1))
    h = _mix64(h ^ (uy * _C2))
    out_a[:] = _mix64(h ^ _C3)
    out_b[:] = _mix64(h ^ _C4)


def max_flow_side(adj_start, adj_arc, arc_to, arc_from, cap_arr, s, t, side_arr):
    n = len(adj_start) - 1
    adj_start = adj_start.tolist()
    adj_arc = adj_arc.tolist()
    arc_to = arc_to.tolist()
    arc_from = arc_from.tolist()
    cap = cap_arr.tolist()

    level = [0] * n
    it = [0] * n
    queue = [0] * n
    path = [0] * (n + 1)

    total = 0.0
    while True:
        for u in range(n):
            level[u] = -1
        level[s] = 0
        queue[0] = s
        qh, qt = 0, 1
        while qh < qt:
            u = queue[qh]
            qh += 1
            for idx in range(adj_start[u], adj_start[u + 1]):
                a = adj_arc[idx]
                v = arc_to[a]
                if cap[a] > _EPS and level[v] < 0:
                    level[v] = level[u] + 1
                    queue[qt] = v
                    qt += 1
        if level[t] < 0:
            break
        for u in range(n):
            it[u] = adj_start[u]
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
                while k < plen and cap[path[k]] > _EPS:
                    k += 1
                plen = k
                v = arc_from[path[k]]
            elif it[v] == adj_start[v + 1]:
                if v == s:
                    break
                level[v] = -1
                plen -= 1
                a = path[plen]
                v = arc_from[a]
                it[v] += 1
            else:
                a = adj_arc[it[v]]
                w = arc_to[a]
                if cap[a] > _EPS and level[w] == level[v] + 1:
                    path[plen] = a
                    plen += 1
                    v = w
                else:
                    it[v] += 1

    side = [0] * n
    side[s] = 1
    queue[0] = s
    qh, qt = 0, 1
    while qh < qt:
        u = queue[qh]
        qh += 1
        for idx in range(adj_start[u], adj_start[u + 1]):
            a = adj_arc[idx]
            v = arc_to[a]
            if cap[a] > _EPS and side[v] == 0:
                side[v] = 1
                queue[qt] = v
                qt += 1

    cap_arr[:] = cap
    side_arr[:] = side
    return total
