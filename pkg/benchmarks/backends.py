"""Compare the compiled and pure-Python kernel backends.

Times ``words_block`` (counter-based RNG expansion) and ``max_flow_side``
(Dinic min-cut) on a ground-state-shaped grid instance, and verifies the two
backends produce bit-identical outputs.

Usage: python benchmarks/backends.py [--n 96] [--repeat 3]
"""

import argparse
import time

import numpy as np

from rfimlab import rng
from rfimlab._kernels import _pure

try:
    from rfimlab._kernels import _core
except ImportError:  # pragma: no cover - build without the extension
    _core = None


def grid_flow_instance(n, seed):
    """s-t max-flow instance shaped like a ground-state cut on Λ_n."""
    side_len = 2 * n + 1
    sites = [(x, y) for x in range(-n, n + 1) for y in range(-n, n + 1)]
    idx = {v: i for i, v in enumerate(sites)}
    xs = np.array([v[0] for v in sites], dtype=np.int64)
    ys = np.array([v[1] for v in sites], dtype=np.int64)
    f = rng.normals(rng.seed_base(seed), xs, ys)
    k = np.zeros(len(sites))
    k[np.abs(xs) == n] += 1.0
    k[np.abs(ys) == n] += 1.0
    f = f + k
    s, t = len(sites), len(sites) + 1
    arc_from, arc_to, cap = [], [], []

    def add(u, v, c_uv, c_vu):
        arc_from.extend((u, v))
        arc_to.extend((v, u))
        cap.extend((c_uv, c_vu))

    for (x, y), i in idx.items():
        for dx, dy in ((1, 0), (0, 1)):
            j = idx.get((x + dx, y + dy))
            if j is not None:
                add(i, j, 2.0, 2.0)
    for i, fi in enumerate(f):
        if fi >= 0.0:
            add(s, i, 2.0 * fi, 0.0)
        else:
            add(i, t, -2.0 * fi, 0.0)
    arc_from = np.array(arc_from, dtype=np.int32)
    arc_to = np.array(arc_to, dtype=np.int32)
    cap = np.array(cap, dtype=np.float64)
    order = np.argsort(arc_from, kind="stable").astype(np.int32)
    counts = np.bincount(arc_from, minlength=t + 2)
    adj_start = np.zeros(t + 2, dtype=np.int32)
    np.cumsum(counts[: t + 1], out=adj_start[1:])
    print("  grid %dx%d: %d nodes, %d arcs"
          % (side_len, side_len, t + 1, len(cap)))
    return adj_start, order, arc_to, arc_from, cap, s, t


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=96,
                    help="grid half-width for the flow instance")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    if _core is None:
        print("compiled backend not built; nothing to compare")
        return

    m = (2 * args.n + 1) ** 2
    xs = np.tile(np.arange(-args.n, args.n + 1, dtype=np.int64), 2 * args.n + 1)
    ys = np.repeat(np.arange(-args.n, args.n + 1, dtype=np.int64),
                   2 * args.n + 1)
    base = rng.seed_base(7)
    outs = {}
    print("words_block on %d sites:" % m)
    for name, impl in (("cython", _core), ("python", _pure)):
        a = np.empty(m, dtype=np.uint64)
        b = np.empty(m, dtype=np.uint64)
        dt, _ = best_of(lambda: impl.words_block(base, xs, ys, a, b),
                        args.repeat)
        outs[name] = (a, b)
        print("  %-7s %8.2f ms" % (name, dt * 1e3))
    same = (np.array_equal(outs["cython"][0], outs["python"][0])
            and np.array_equal(outs["cython"][1], outs["python"][1]))
    print("  outputs bit-identical: %s" % same)
    assert same

    print("max_flow_side:")
    adj_start, order, arc_to, arc_from, cap, s, t = grid_flow_instance(
        args.n, 7)
    flows, sides = {}, {}
    for name, impl in (("cython", _core), ("python", _pure)):
        def run(impl=impl, name=name):
            side = np.zeros(t + 1, dtype=np.uint8)
            flow = impl.max_flow_side(adj_start, order, arc_to, arc_from,
                                      cap.copy(), s, t, side)
            flows[name], sides[name] = flow, side
            return flow
        dt, _ = best_of(run, args.repeat)
        print("  %-7s %8.2f ms  (flow %.6f)" % (name, dt * 1e3, flows[name]))
    same = (flows["cython"] == flows["python"]
            and np.array_equal(sides["cython"], sides["python"]))
    print("  flow and cut side bit-identical: %s" % same)
    assert same


if __name__ == "__main__":
    main()
