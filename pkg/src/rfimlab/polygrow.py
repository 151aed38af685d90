"""Randomized triangle-growing polygon construction with geometric validators.

Growth proceeds in stages. Stage n presents 4**n sides; each side i proposes
an outward isosceles triangle T (base = middle half of the side) with an apex
decision region T* (the similar triangle at distance >= 2/3 of the height
from the base). A field functional over T* (or T in continuum mode) decides
Z in {0,1}: accepted sides are replaced by the four-segment path around T,
rejected sides split into four collinear quarters, so the side count stays
exactly 4**n and the Z-history alone reconstructs the polygon.

Every geometric guarantee of the construction is enforced by `validate`,
whose violations carry descriptive names:

  same-stage-triangle-overlap    accepted triangles of one stage must be
                                 pairwise disjoint and meet the polygon only
                                 along their own side
  triangle-out-of-bounds         every proposed triangle stays in [-2N,2N]^2
  decision-region-overlap        all decided T* (any stage) pairwise disjoint
  rejected-region-touches-polygon  rejected T* never meets the grown polygon
  replay-mismatch                replaying Z must rebuild the exact vertices
  side-length                    side length >= l(dP_1) * 4^-n at stage n
  perimeter-increment            per-accept increment <= delta^2 * r
                                 (continuum: <= eps^(4/3) * l / 16)
  boundary-length-bound          |d(P cap Z^2)| <= sqrt(2) * perimeter + 2q
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import geom
from .errors import DomainError, PreconditionError, ValidationViolation
from .field import box_sites

MODES = ("lattice_simplified", "continuum", "lattice_ising")
DEGENERATE_AREA = 1e-12


@dataclass(frozen=True)
class TrianglePair:
    side_index: int  # 1-based within the stage
    A: tuple
    B: tuple
    T: tuple      # (a, b, q): base ends then apex
    T_star: tuple  # apex sub-triangle (t1, t2, q)
    r: float      # quarter side length
    height: float


@dataclass(frozen=True)
class DecisionRecord:
    n: int
    i: int
    pair: TrianglePair
    Z: int
    stat: float
    threshold: float


@dataclass
class GrowthState:
    N: int
    epsilon: float
    m_param: float
    mode: str
    seed: int
    delta: float
    n_star: int
    perim1: float
    n: int = 1
    i: int = 0  # decided sides so far in the current stage
    sides: list = dataclass_field(default_factory=list)
    pending: list = dataclass_field(default_factory=list)  # children, 4/side
    Z: dict = dataclass_field(default_factory=dict)
    decided: list = dataclass_field(default_factory=list)
    stage_sides_history: dict = dataclass_field(default_factory=dict)
    stage_stats: dict = dataclass_field(default_factory=dict)
    _ising_set: set | None = None


@dataclass
class GrowthReport:
    P_star: tuple
    lattice_xs: np.ndarray
    lattice_ys: np.ndarray
    perimeter: float
    lattice_boundary: int
    gamma_value: float
    certificate_ratio: float
    violations: list


def _n_star(N):
    k = 0
    p = 1
    while p * 16 <= N:
        p *= 16
        k += 1
    return max(1, k)


def init_growth(N, epsilon, m_param, seed=0, mode="lattice_simplified"):
    """Stage-1 state: the square P_1 with sides numbered CCW from the bottom.

    P_1 = [-N, N]^2 in the lattice modes and [-N/2, N/2]^2 in continuum mode.
    """
    if N < 1:
        raise PreconditionError("N must be >= 1")
    if not (epsilon >= 0.0 and math.isfinite(epsilon)):
        raise PreconditionError("epsilon must be a finite nonneg real")
    if not (0.0 < m_param < 1.0):
        raise PreconditionError("m_param must lie in (0, 1)")
    if mode not in MODES:
        raise PreconditionError("mode must be one of %s" % (MODES,))
    delta = 1e-2 * (epsilon * m_param) ** (2.0 / 3.0)
    half = N / 2.0 if mode == "continuum" else float(N)
    corners = [(-half, -half), (half, -half), (half, half), (-half, half)]
    sides = [(corners[j], corners[(j + 1) % 4]) for j in range(4)]
    state = GrowthState(
        N=int(N), epsilon=float(epsilon), m_param=float(m_param), mode=mode,
        seed=int(seed), delta=delta, n_star=_n_star(N), perim1=8.0 * half,
        sides=sides)
    state.stage_sides_history[1] = tuple(sides)
    return state


def _propose(A, B, state):
    dx = B[0] - A[0]
    dy = B[1] - A[1]
    a = (A[0] + 0.25 * dx, A[1] + 0.25 * dy)
    b = (A[0] + 0.75 * dx, A[1] + 0.75 * dy)
    mid = (A[0] + 0.5 * dx, A[1] + 0.5 * dy)
    length = math.hypot(dx, dy)
    r = 0.25 * length
    if state.mode == "continuum":
        height = state.epsilon ** (2.0 / 3.0) * length / 8.0
    else:
        height = state.delta * r
    # outward normal of a CCW polygon is the right-hand normal of the side
    ux = dx / length
    uy = dy / length
    q = (mid[0] + height * uy, mid[1] - height * ux)
    t1 = (a[0] + (2.0 / 3.0) * (q[0] - a[0]), a[1] + (2.0 / 3.0) * (q[1] - a[1]))
    t2 = (b[0] + (2.0 / 3.0) * (q[0] - b[0]), b[1] + (2.0 / 3.0) * (q[1] - b[1]))
    return A, B, (a, b, q), (t1, t2, q), r, height


def propose_triangle(state, i):
    """TrianglePair for 1-based side i of the current stage."""
    if not (1 <= i <= len(state.sides)):
        raise DomainError("side index %d out of range" % i)
    A, B = state.sides[i - 1]
    pA, pB, T, T_star, r, height = _propose(A, B, state)
    return TrianglePair(i, pA, pB, T, T_star, r, height)


def _children(pair, Z):
    """The four replacement sides of the decided side (both endpoints kept)."""
    A, B = pair.A, pair.B
    a, b, q = pair.T
    if Z:
        path = (A, a, q, b, B)
    else:
        mid = (A[0] + 0.5 * (B[0] - A[0]), A[1] + 0.5 * (B[1] - A[1]))
        path = (A, a, mid, b, B)
    return [(path[k], path[k + 1]) for k in range(4)]


def _tstar_has_site(T_star):
    area = geom.triangle_area(*T_star)
    per = (geom.dist(T_star[0], T_star[1]) + geom.dist(T_star[1], T_star[2])
           + geom.dist(T_star[2], T_star[0]))
    if per > 0.0 and 2.0 * area / per >= 0.71:
        # the inscribed disk has radius >= sqrt(2)/2, so it holds a site
        return True
    xs, _ = geom.triangle_lattice_points(*T_star)
    return len(xs) > 0


def _ising_decision(state, pair, fld):
    from . import ising  # local import: only this mode needs the solver
    box = frozenset(box_sites(state.N))
    if state._ising_set is None:
        xs, ys = geom.polygon_lattice_points(polygon_vertices(state))
        state._ising_set = {(int(x), int(y)) for x, y in zip(xs, ys)} & box
    cur = frozenset(state._ising_set)
    txs, tys = geom.triangle_lattice_points(*pair.T)
    new = {(int(x), int(y)) for x, y in zip(txs, tys)} & box
    gain = frozenset(new - cur)
    if not gain:
        return 0.0, cur, new
    return ising.gamma_increment(cur, gain, box, fld, math.inf), cur, new


def accept(state, pair, fld):
    """Z in {0,1} for the proposed pair under the state's acceptance mode."""
    return _decision(state, pair, fld)[0]


def _decision(state, pair, fld):
    if geom.triangle_area(*pair.T_star) <= DEGENERATE_AREA:
        return 0, 0.0, 0.0
    if not _tstar_has_site(pair.T_star):
        return 0, 0.0, 0.0
    if state.mode == "continuum":
        xs, ys = geom.triangle_lattice_points(*pair.T)
        stat = fld.sum_over(xs, ys)
        return (1 if stat > 0.0 else 0), stat, 0.0
    if state.mode == "lattice_ising":
        stat, cur, new = _ising_decision(state, pair, fld)
    else:
        xs, ys = geom.triangle_lattice_points(*pair.T_star)
        stat = state.epsilon * fld.sum_over(xs, ys)
    threshold = 10.0 * state.delta * state.delta * pair.r
    return (1 if stat >= threshold else 0), stat, threshold


def _accept_perimeter_increment(pair):
    a, b, q = pair.T
    new_len = (geom.dist(pair.A, a) + geom.dist(a, q)
               + geom.dist(q, b) + geom.dist(b, pair.B))
    return new_len - geom.dist(pair.A, pair.B)


def step(state, fld):
    """Decide the next side; roll to the next stage after the last one."""
    if state.n >= state.n_star:
        raise DomainError("growth already reached stage n*")
    i = state.i + 1
    pair = propose_triangle(state, i)
    Z, stat, threshold = _decision(state, pair, fld)
    state.Z[(state.n, i)] = Z
    state.decided.append(DecisionRecord(state.n, i, pair, Z, stat, threshold))
    stats = state.stage_stats.setdefault(
        state.n, {"accepts": 0, "eps_gain": 0.0, "perim_inc": 0.0})
    if Z:
        stats["accepts"] += 1
        gain = state.epsilon * stat if state.mode == "continuum" else stat
        stats["eps_gain"] += gain
        stats["perim_inc"] += _accept_perimeter_increment(pair)
        if state.mode == "lattice_ising" and state._ising_set is not None:
            xs, ys = geom.triangle_lattice_points(*pair.T)
            box = frozenset(box_sites(state.N))
            state._ising_set |= {(int(x), int(y))
                                 for x, y in zip(xs, ys)} & box
    state.pending.extend(_children(pair, Z))
    state.i = i
    if state.i == len(state.sides):
        state.n += 1
        state.sides = list(state.pending)
        state.pending = []
        state.i = 0
        state.stage_sides_history[state.n] = tuple(state.sides)
    return state


def polygon_vertices(state):
    """Vertex list of P_{n,i}: decided sides contribute their child path."""
    verts = []
    for j, (A, _B) in enumerate(state.sides):
        verts.append(A)
        if j < state.i:
            kids = state.pending[4 * j: 4 * j + 3]
            verts.extend(k[1] for k in kids)
    return verts


def _decided_pairs(state):
    """Recompute every decided TrianglePair from the stage snapshots."""
    out = []
    for (n, i), z in sorted(state.Z.items()):
        A, B = state.stage_sides_history[n][i - 1]
        pA, pB, T, T_star, r, height = _propose(A, B, state)
        out.append((n, i, TrianglePair(i, pA, pB, T, T_star, r, height), z))
    return out


def validate(state):
    """All construction guarantees; returns violation strings, never raises."""
    violations = []
    pairs = _decided_pairs(state)
    tol = geom.EPS_GEOM

    # (a) same-stage accepted triangles: pairwise disjoint, meet P only in S
    by_stage = {}
    for n, i, pair, z in pairs:
        if z:
            by_stage.setdefault(n, []).append((i, pair))
    for n, entries in by_stage.items():
        for k in range(len(entries)):
            for m in range(k + 1, len(entries)):
                if not geom.triangles_disjoint(entries[k][1].T,
                                               entries[m][1].T, tol):
                    violations.append(
                        "same-stage-triangle-overlap: stage %d sides %d,%d"
                        % (n, entries[k][0], entries[m][0]))
        snapshot = state.stage_sides_history[n]
        for i, pair in entries:
            for j, (sA, sB) in enumerate(snapshot, start=1):
                if j == i:
                    continue
                if geom.segment_intersects_triangle(sA, sB, *pair.T, tol=tol):
                    violations.append(
                        "same-stage-triangle-overlap: stage %d triangle %d "
                        "meets side %d" % (n, i, j))

    # (b) every decided triangle inside [-2N, 2N]^2
    lim = 2.0 * state.N + 1e-9
    for n, i, pair, _z in pairs:
        if any(abs(c) > lim for v in pair.T for c in v):
            violations.append("triangle-out-of-bounds: stage %d side %d"
                              % (n, i))

    # (c) decision regions T* pairwise disjoint across all decided indices
    for k in range(len(pairs)):
        for m in range(k + 1, len(pairs)):
            if not geom.triangles_disjoint(pairs[k][2].T_star,
                                           pairs[m][2].T_star, tol):
                violations.append(
                    "decision-region-overlap: (%d,%d) vs (%d,%d)"
                    % (pairs[k][0], pairs[k][1], pairs[m][0], pairs[m][1]))

    # (d) rejected T* never meets the current polygon
    verts = polygon_vertices(state)
    edges = list(zip(verts, verts[1:] + verts[:1]))
    for n, i, pair, z in pairs:
        if z:
            continue
        hit = any(geom.segment_intersects_triangle(eA, eB, *pair.T_star,
                                                   tol=tol)
                  for eA, eB in edges)
        if not hit:
            cx = (pair.T_star[0][0] + pair.T_star[1][0] + pair.T_star[2][0]) / 3.0
            cy = (pair.T_star[0][1] + pair.T_star[1][1] + pair.T_star[2][1]) / 3.0
            hit = geom.point_in_simple_polygon((cx, cy), verts, tol)
        if hit:
            violations.append(
                "rejected-region-touches-polygon: stage %d side %d" % (n, i))

    # (e) the Z-flag history alone rebuilds the exact vertices
    replay = list(state.stage_sides_history[1])
    for n in range(1, state.n + 1):
        if tuple(replay) != tuple(state.stage_sides_history[n]):
            violations.append("replay-mismatch: stage %d sides differ" % n)
            break
        if n == state.n:
            kids = []
            for i in range(1, state.i + 1):
                A, B = replay[i - 1]
                pA, pB, T, T_star, r, height = _propose(A, B, state)
                kids.extend(_children(
                    TrianglePair(i, pA, pB, T, T_star, r, height),
                    state.Z[(n, i)]))
            if kids != state.pending:
                violations.append("replay-mismatch: stage %d children differ"
                                  % n)
            break
        nxt = []
        for i in range(1, len(replay) + 1):
            A, B = replay[i - 1]
            pA, pB, T, T_star, r, height = _propose(A, B, state)
            nxt.extend(_children(
                TrianglePair(i, pA, pB, T, T_star, r, height),
                state.Z[(n, i)]))
        replay = nxt

    # (f) minimum side length at the current stage
    min_len = state.perim1 * 4.0 ** (-state.n) - 1e-9
    for j, (A, B) in enumerate(state.sides, start=1):
        if geom.dist(A, B) < min_len:
            violations.append("side-length: stage %d side %d length %.17g"
                              % (state.n, j, geom.dist(A, B)))

    # (g) per-accept perimeter increment bound
    for n, i, pair, z in pairs:
        if not z:
            continue
        inc = _accept_perimeter_increment(pair)
        if state.mode == "continuum":
            bound = state.epsilon ** (4.0 / 3.0) * (4.0 * pair.r) / 16.0
        else:
            bound = state.delta * state.delta * pair.r
        if inc > bound + 1e-9:
            violations.append(
                "perimeter-increment: stage %d side %d inc %.17g > %.17g"
                % (n, i, inc, bound))

    # (h) lattice boundary vs sqrt(2) * perimeter + 2 * side count
    xs, ys = geom.polygon_lattice_points(verts)
    lb = geom.lattice_boundary_count(xs, ys)
    per = geom.polygon_perimeter(verts)
    if lb > math.sqrt(2.0) * per + 2.0 * len(edges) + 1e-9:
        violations.append(
            "boundary-length-bound: |dP|=%d > sqrt(2)*%.17g + 2*%d"
            % (lb, per, len(edges)))

    return violations


def run_stages(state, fld, validators=True):
    """Execute all decisions through stage n*-1, validating per stage."""
    if validators:
        _check(state)
    while state.n < state.n_star:
        stage = state.n
        while state.n == stage:
            step(state, fld)
        if validators:
            _check(state)
    return state


def _check(state):
    violations = validate(state)
    if violations:
        raise ValidationViolation(violations[0])


def run(state, fld, validators=True):
    """Grow to P* = P_{n*} and report its lattice certificate quantities."""
    run_stages(state, fld, validators=validators)
    verts = polygon_vertices(state)
    xs, ys = geom.polygon_lattice_points(verts)
    perim = geom.polygon_perimeter(verts)
    lb = geom.lattice_boundary_count(xs, ys)
    gamma_value = state.epsilon * fld.sum_over(xs, ys)
    ratio = gamma_value / lb if lb else 0.0
    return GrowthReport(tuple(verts), xs, ys, perim, lb, gamma_value, ratio,
                        [])
