"""Lattice animals: exact enumeration, boundary-normalized greedy optimization
(exact and annealed), hole filling, the simply-connected reduction identity,
and ground-state flip certificates.

The normalized value of an animal A is Σ_{v∈A} h_v / |∂A| with the raw stored
field values — ε enters only the flip certificate and growth thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import DomainError, SizeCapError, ValidationViolation
from .field import (_complement_components, boundary_size, box_sites,
                    is_connected, neighbors)
from .ising import Region, ground_state

ENUM_SIZE_CAP = 14


@dataclass(frozen=True)
class LatticeAnimal:
    sites: frozenset
    value_numerator: float
    boundary_size: int
    normalized_value: float

    @staticmethod
    def evaluate(sites, fld):
        sites = frozenset(sites)
        if not is_connected(sites):
            raise DomainError("animal sites must be connected")
        ordered = sorted(sites)
        xs = np.array([v[0] for v in ordered], dtype=np.int64)
        ys = np.array([v[1] for v in ordered], dtype=np.int64)
        num = fld.sum_over(xs, ys)
        bnd = boundary_size(sites)
        return LatticeAnimal(sites, num, bnd, num / bnd)


@dataclass
class AnimalSearchResult:
    best: LatticeAnimal
    mode: str
    explored: int
    seed: int | None = None


def _has_hole(sites):
    enclosed, _ = _complement_components(sites)
    return bool(enclosed)


def _enumerate_site_sets(N, max_size, anchored):
    """Each connected subset of Λ_N with ≤ max_size sites, exactly once.

    Reverse-search with an exclusion set: a branch that includes candidate v
    bans all earlier candidates of the same frame, so every connected set has
    a unique derivation.  Anchored enumeration roots at the origin; otherwise
    each set is rooted at its minimum site.
    """
    universe = box_sites(N)
    uni = set(universe)
    out = []

    def grow(sub, ext, excluded):
        out.append(tuple(sub))
        if len(sub) == max_size:
            return
        for idx in range(len(ext)):
            v = ext[idx]
            banned = excluded | set(ext[:idx])
            tail = ext[idx + 1:]
            seen = set(tail)
            new_ext = list(tail)
            for w in neighbors(v):
                if w in uni and w not in sub and w != v and \
                        w not in banned and w not in seen:
                    new_ext.append(w)
                    seen.add(w)
            sub.append(v)
            grow(sub, new_ext, banned)
            sub.pop()

    if anchored:
        roots = [(0, 0)] if (0, 0) in uni else []
        for root in roots:
            ext = [w for w in neighbors(root) if w in uni]
            grow([root], ext, {root})
    else:
        order = {v: i for i, v in enumerate(universe)}
        for root in universe:
            banned = {w for w in universe if order[w] < order[root]}
            ext = [w for w in neighbors(root) if w in uni and w not in banned]
            grow([root], ext, banned | {root})
    return out


_enum_cache = {}


def _animal_sets(N, max_size, cls, anchored):
    if max_size < 1:
        raise DomainError("max_size must be >= 1")
    key = (N, max_size, cls, anchored)
    cached = _enum_cache.get(key)
    if cached is not None:
        return cached
    sets_all = _enumerate_site_sets(N, max_size, anchored)
    if cls == "simply_connected":
        sets_all = [s for s in sets_all if not _has_hole(s)]
    elif cls != "connected":
        raise DomainError("class must be 'connected' or 'simply_connected'")
    # precompute flat field indices (row-major Λ_N) and boundary sizes
    side = 2 * N + 1
    idx_arrays = np.array(
        [i for s in sets_all for i in
         ((x + N) + (y + N) * side for x, y in s)], dtype=np.int64)
    offsets = np.zeros(len(sets_all) + 1, dtype=np.int64)
    np.cumsum([len(s) for s in sets_all], out=offsets[1:])
    bounds = np.array([boundary_size(s) for s in sets_all], dtype=np.float64)
    result = (sets_all, idx_arrays, offsets, bounds)
    if len(_enum_cache) > 8:
        _enum_cache.clear()
    _enum_cache[key] = result
    return result


def enumerate_animals(N, max_size, cls="connected", anchored=False, fld=None):
    """Stream of LatticeAnimal over the requested class (cap: 14 sites)."""
    if max_size > ENUM_SIZE_CAP:
        raise SizeCapError("enumeration capped at %d sites" % ENUM_SIZE_CAP)
    sets_all, _, _, bounds = _animal_sets(N, max_size, cls, anchored)
    for s, b in zip(sets_all, bounds):
        if fld is None:
            yield LatticeAnimal(frozenset(s), math.nan, int(b), math.nan)
        else:
            yield LatticeAnimal.evaluate(s, fld)


def _box_values(fld):
    sites = box_sites(fld.N)
    xs = np.array([v[0] for v in sites], dtype=np.int64)
    ys = np.array([v[1] for v in sites], dtype=np.int64)
    return fld.values_at(xs, ys)


def _class_maxima(fld, N, max_size, cls, anchored, absolute):
    """(best index, values array, site sets) for Σh/|∂| maximization."""
    sets_all, idx, offsets, bounds = _animal_sets(N, max_size, cls, anchored)
    vals = _box_values(fld)
    sums = np.add.reduceat(vals[idx], offsets[:-1]) if len(idx) else np.array([])
    # reduceat quirk: an empty slice copies the element; no empty sets occur here
    nums = np.abs(sums) if absolute else sums
    scores = nums / bounds
    k = int(np.argmax(scores))
    return k, scores, sets_all


def greedy_value_exact(fld, max_size, cls="connected", anchored=False):
    """Exact maximizer of Σh_v/|∂A| over the enumerated class."""
    if max_size > ENUM_SIZE_CAP:
        raise SizeCapError("enumeration capped at %d sites" % ENUM_SIZE_CAP)
    k, scores, sets_all = _class_maxima(fld, fld.N, max_size, cls, anchored,
                                        absolute=False)
    best = LatticeAnimal.evaluate(sets_all[k], fld)
    return AnimalSearchResult(best, "exact", len(sets_all))


def fill_holes(A):
    """(filled, holes): fill every component enclosed by connected A.

    Boundary additivity |∂A| = |∂filled| + Σ|∂hole_i| holds exactly.
    """
    A = set(A)
    if not is_connected(A):
        raise DomainError("fill_holes requires a connected site set")
    enclosed, _ = _complement_components(A)
    filled = set(A)
    for comp in enclosed:
        filled |= comp
    return filled, enclosed


def reduction_identity_check(fld, N, max_size, anchored=False):
    """Compare max |Σh|/|∂| over simply-connected vs all connected animals.

    When the connected-class maximizer's hole-filled hull still fits the size
    cap the two maxima must agree (filling can only help one of hull/holes),
    and that equality is asserted to 1e-12.  Returns (max_sc, max_c).
    """
    if max_size > ENUM_SIZE_CAP:
        raise SizeCapError("enumeration capped at %d sites" % ENUM_SIZE_CAP)
    k_sc, scores_sc, _ = _class_maxima(fld, N, max_size, "simply_connected",
                                       anchored, absolute=True)
    k_c, scores_c, sets_c = _class_maxima(fld, N, max_size, "connected",
                                          anchored, absolute=True)
    max_sc = float(scores_sc[k_sc])
    max_c = float(scores_c[k_c])
    filled, _ = fill_holes(set(sets_c[k_c]))
    if len(filled) <= max_size and abs(max_sc - max_c) > 1e-12:
        raise ValidationViolation(
            "reduction identity failed: max_sc=%.17g max_c=%.17g"
            % (max_sc, max_c))
    return max_sc, max_c


def flip_certificate(fld, N):
    """Plus-component certificate of the minus-boundary ground state.

    Returns None when the origin is already minus; otherwise returns the
    connected plus-component S containing the origin and enforces the flip
    inequality ε·Σ_{v∈S} h_v ≥ |∂S| (flipping S would otherwise lower H).
    """
    gs = ground_state(Region(frozenset(box_sites(N)), "minus"), fld)
    if gs.spins[(0, 0)] == -1:
        return None
    plus = {v for v, s in gs.spins.items() if s == 1}
    comp = {(0, 0)}
    stack = [(0, 0)]
    while stack:
        v = stack.pop()
        for w in neighbors(v):
            if w in plus and w not in comp:
                comp.add(w)
                stack.append(w)
    cert = LatticeAnimal.evaluate(comp, fld)
    if fld.epsilon * cert.value_numerator < cert.boundary_size:
        raise ValidationViolation(
            "flip inequality violated: eps*sum=%.17g < boundary=%d"
            % (fld.epsilon * cert.value_numerator, cert.boundary_size))
    return cert


def dump_animal(a):
    """Two-line dump: `value boundary size` then `x,y;x,y;…` (sorted sites)."""
    head = "%.17g %d %d" % (a.normalized_value, a.boundary_size, len(a.sites))
    body = ";".join("%d,%d" % v for v in sorted(a.sites))
    return head + "\n" + body + "\n"


def load_animal(text, fld=None):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 2:
        raise DomainError("animal dump must have exactly two lines")
    sites = frozenset(tuple(int(t) for t in part.split(","))
                      for part in lines[1].split(";"))
    if fld is not None:
        return LatticeAnimal.evaluate(sites, fld)
    value, bnd, size = lines[0].split()
    if int(size) != len(sites):
        raise DomainError("animal dump size mismatch")
    bnd = int(bnd)
    return LatticeAnimal(sites, float(value) * bnd, bnd, float(value))


# ---------------------------------------------------------------------------
# simulated annealing

_RING = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))


def _ring_arc_count(v, members):
    """Number of cyclic runs of ring cells satisfying the membership test.

    The punctured 3×3 ring under 4-adjacency is an 8-cycle, so one arc means
    the tested cells stay locally connected around v.
    """
    x, y = v
    flags = [(x + dx, y + dy) in members for dx, dy in _RING]
    arcs = 0
    for i in range(8):
        if flags[i] and not flags[i - 1]:
            arcs += 1
    return arcs


def _removal_keeps_connected(A, v):
    if _ring_arc_count(v, A - {v}) <= 1:
        return True
    rest = A - {v}
    if not rest:
        return True
    return is_connected(rest)


def _addition_keeps_simply_connected(A, v):
    """After adding v: does the complement stay unsplit (no new hole)?

    One complement arc around v is a structural guarantee; otherwise fall
    back to exact hole detection on the grown set.
    """
    newA = A | {v}
    x, y = v
    flags = [((x + dx, y + dy) not in newA) for dx, dy in _RING]
    arcs = 0
    for i in range(8):
        if flags[i] and not flags[i - 1]:
            arcs += 1
    if arcs <= 1:
        return True
    return not _has_hole(newA)


def greedy_value_anneal(fld, budget, seed, cls="connected"):
    """Annealed lower bound for the greedy animal value on Λ_N.

    Starts from the best single site, then applies add-leaf / remove-leaf /
    translate moves under a geometric temperature schedule from 1 to 0.01.
    Every random draw is a pure function of (seed, move index), so runs are
    reproducible move-for-move.
    """
    if budget < 0:
        raise DomainError("budget must be >= 0")
    if cls not in ("connected", "simply_connected"):
        raise DomainError("class must be 'connected' or 'simply_connected'")
    N = fld.N
    sites = box_sites(N)
    vals = _box_values(fld)
    start = sites[int(np.argmax(vals))]
    side = 2 * N + 1
    hmap = {s: float(vals[(s[0] + N) + (s[1] + N) * side]) for s in sites}

    A = {start}
    sumh = hmap[start]
    bnd = 4
    value = sumh / bnd
    best_sites = tuple(sorted(A))
    best_value = value

    if budget:
        steps = np.arange(budget, dtype=np.int64)
        u_kind = rng.uniforms(seed, steps, np.zeros(budget, dtype=np.int64))
        u_pick = rng.uniforms(seed, steps, np.ones(budget, dtype=np.int64))
        u_acc = rng.uniforms(seed, steps, np.full(budget, 2, dtype=np.int64))
    t_ratio = 0.01
    in_box = lambda v: abs(v[0]) <= N and abs(v[1]) <= N

    for t in range(budget):
        T = 1.0 * t_ratio ** (t / max(1, budget - 1))
        kind = u_kind[t]
        proposal = None  # (new_sites, new_sum, new_bnd)
        if kind < 0.4:  # add a frontier site
            frontier = sorted({w for v in A for w in neighbors(v)
                               if w not in A and in_box(w)})
            if frontier:
                v = frontier[int(u_pick[t] * len(frontier)) % len(frontier)]
                if cls == "connected" or _addition_keeps_simply_connected(A, v):
                    delta_b = 4 - 2 * sum(1 for w in neighbors(v) if w in A)
                    proposal = (A | {v}, sumh + hmap[v], bnd + delta_b)
        elif kind < 0.8:  # remove a site that keeps the class
            if len(A) > 1:
                removable = [v for v in sorted(A)
                             if _removal_keeps_connected(A, v)]
                if removable:
                    v = removable[int(u_pick[t] * len(removable)) % len(removable)]
                    delta_b = 4 - 2 * sum(1 for w in neighbors(v) if w in A)
                    proposal = (A - {v}, sumh - hmap[v], bnd - delta_b)
        else:  # translate the whole animal
            dx, dy = _RING[int(u_pick[t] * 4) % 4 * 2]  # (±1,0),(0,±1)
            moved = {(x + dx, y + dy) for x, y in A}
            if all(in_box(v) for v in moved):
                new_sum = sum(hmap[v] for v in sorted(moved))
                proposal = (moved, new_sum, bnd)
        if proposal is None:
            continue
        newA, new_sum, new_bnd = proposal
        new_value = new_sum / new_bnd
        dv = new_value - value
        if dv >= 0 or u_acc[t] < math.exp(dv / T):
            A, sumh, bnd, value = newA, new_sum, new_bnd, new_value
            if value > best_value:
                best_value = value
                best_sites = tuple(sorted(A))

    best = LatticeAnimal.evaluate(best_sites, fld)
    return AnimalSearchResult(best, "anneal", budget, seed)
