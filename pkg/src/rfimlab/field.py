"""Lattice geometry, boundary computations, and the Gaussian disorder field.

Sites are ``(x, y)`` integer tuples with 4-adjacency.  The disorder field is a
pure function of ``(seed, x, y)`` through the counter-based generator in
:mod:`rfimlab.rng`, so values are reproducible site-by-site in any order.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import rng

Site = tuple

_NEIGHBOR_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def neighbors(v):
    """The four nearest neighbors of a site, in (+x, -x, +y, -y) order."""
    x, y = v
    return [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)]


def box_sites(N):
    """All sites of Λ_N = {|x| ≤ N, |y| ≤ N} in row-major order (y outer)."""
    return [(x, y) for y in range(-N, N + 1) for x in range(-N, N + 1)]


def boundary(A):
    """Edge boundary of a finite site set.

    Returns ``(count, edges)`` where ``edges`` lists each nearest-neighbor
    pair with exactly one endpoint inside, as ``(inside, outside)``, once.
    """
    A = set(A)
    edges = []
    for v in sorted(A):
        x, y = v
        for dx, dy in _NEIGHBOR_STEPS:
            w = (x + dx, y + dy)
            if w not in A:
                edges.append((v, w))
    return len(edges), edges


def boundary_size(A):
    """|∂A| without materializing the edge list."""
    A = set(A)
    count = 0
    for x, y in A:
        for dx, dy in _NEIGHBOR_STEPS:
            if (x + dx, y + dy) not in A:
                count += 1
    return count


def is_connected(A):
    """True iff A is connected under 4-adjacency (∅ and singletons count)."""
    A = set(A)
    if len(A) <= 1:
        return True
    start = next(iter(A))
    seen = {start}
    stack = [start]
    while stack:
        x, y = stack.pop()
        for dx, dy in _NEIGHBOR_STEPS:
            w = (x + dx, y + dy)
            if w in A and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(A)


def _complement_components(A):
    """Connected components of bbox∖A, bbox = bounding box padded by one.

    Returns ``(enclosed, outer_reached)`` where ``enclosed`` is the list of
    components that do not touch the outer padding layer.
    """
    A = set(A)
    if not A:
        return [], True
    xs = [x for x, _ in A]
    ys = [y for _, y in A]
    x0, x1 = min(xs) - 1, max(xs) + 1
    y0, y1 = min(ys) - 1, max(ys) + 1
    seen = set()
    enclosed = []
    for sx in range(x0, x1 + 1):
        for sy in range(y0, y1 + 1):
            s = (sx, sy)
            if s in A or s in seen:
                continue
            comp = [s]
            seen.add(s)
            stack = [s]
            touches_rim = False
            while stack:
                x, y = stack.pop()
                if x in (x0, x1) or y in (y0, y1):
                    touches_rim = True
                for dx, dy in _NEIGHBOR_STEPS:
                    w = (x + dx, y + dy)
                    if (x0 <= w[0] <= x1 and y0 <= w[1] <= y1
                            and w not in A and w not in seen):
                        seen.add(w)
                        comp.append(w)
                        stack.append(w)
            if not touches_rim:
                enclosed.append(set(comp))
    return enclosed, True


def is_simply_connected(A):
    """True iff connected A encloses no holes.

    The complement is flood-filled inside the bounding box enlarged by one
    layer; A is simply connected iff every complement component reaches that
    outer layer.  Raises ``ValueError`` if A is not connected.
    """
    if not is_connected(A):
        raise ValueError("is_simply_connected requires a connected site set")
    enclosed, _ = _complement_components(A)
    return not enclosed


@dataclass(frozen=True)
class DisorderField:
    """Standard-Gaussian disorder on (and beyond) the box Λ_N.

    ``value_at`` works for any site — N scopes dumps and region validation,
    not the generator.  ``overrides`` pins explicit values on selected sites
    (used for hand-built instances and perturbation tests); ``base`` selects
    what un-overridden sites carry: generated normals or zero.
    """

    N: int
    seed: int
    epsilon: float
    overrides: dict = dataclass_field(default_factory=dict)
    base: str = "rng"  # "rng" | "zero"

    def value_at(self, v):
        if v in self.overrides:
            return self.overrides[v]
        if self.base == "zero":
            return 0.0
        z = rng.normals(self.seed, np.array([v[0]], dtype=np.int64),
                        np.array([v[1]], dtype=np.int64))
        return float(z[0])

    def values_at(self, xs, ys):
        """Vectorized h-values for coordinate arrays (row of the dump order)."""
        xs = np.ascontiguousarray(xs, dtype=np.int64)
        ys = np.ascontiguousarray(ys, dtype=np.int64)
        if self.base == "zero":
            out = np.zeros(len(xs), dtype=np.float64)
        else:
            out = rng.normals(self.seed, xs, ys)
        if self.overrides:
            for i in range(len(xs)):
                key = (int(xs[i]), int(ys[i]))
                if key in self.overrides:
                    out[i] = self.overrides[key]
        return out

    def sum_over(self, xs, ys):
        """Σ h_v over the given sites, summed in the order supplied."""
        if len(xs) == 0:
            return 0.0
        return float(np.sum(self.values_at(xs, ys)))

    @property
    def values(self):
        """Materialized {site: h} over Λ_N (small N only)."""
        sites = box_sites(self.N)
        xs = np.array([s[0] for s in sites], dtype=np.int64)
        ys = np.array([s[1] for s in sites], dtype=np.int64)
        vals = self.values_at(xs, ys)
        return {s: float(h) for s, h in zip(sites, vals)}

    def with_overrides(self, mapping):
        """Copy of this field with some site values replaced."""
        merged = dict(self.overrides)
        merged.update(mapping)
        return DisorderField(self.N, self.seed, self.epsilon, merged, self.base)

    def in_box(self, v):
        return abs(v[0]) <= self.N and abs(v[1]) <= self.N

    def dump(self, path):
        """Write the field file: header then `x y h` rows in row-major order."""
        sites = box_sites(self.N)
        xs = np.array([s[0] for s in sites], dtype=np.int64)
        ys = np.array([s[1] for s in sites], dtype=np.int64)
        vals = self.values_at(xs, ys)
        with open(path, "w") as fh:
            fh.write("N=%d seed=%d eps=%.17g\n" % (self.N, self.seed, self.epsilon))
            for x, y, h in zip(xs, ys, vals):
                fh.write("%d %d %.17g\n" % (x, y, h))

    @staticmethod
    def load(path):
        """Read a field file back; values become explicit overrides."""
        with open(path) as fh:
            header = fh.readline().split()
            meta = dict(kv.split("=", 1) for kv in header)
            overrides = {}
            for line in fh:
                parts = line.split()
                if not parts:
                    continue
                overrides[(int(parts[0]), int(parts[1]))] = float(parts[2])
        return DisorderField(int(meta["N"]), int(meta["seed"]),
                             float(meta["eps"]), overrides, "zero")


def sample_field(N, seed, epsilon):
    """Disorder field on Λ_N keyed on (seed, x, y); order-independent."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    return DisorderField(int(N), int(seed), float(epsilon))


def zero_field(N, epsilon=1.0, overrides=None):
    """All-zero field with optional explicit spikes (for hand-built tests)."""
    return DisorderField(int(N), 0, float(epsilon), dict(overrides or {}), "zero")
