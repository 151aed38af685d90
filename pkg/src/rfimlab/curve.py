"""Oriented piecewise-linear curve calculus.

Winding numbers with an exact half-open crossing convention, the nu
functional against pluggable cell measures (signed area exactly via
rationals, Gaussian cell masses via winding sums at integer cell centers),
decomposition identities, splitting/good-curve certification with witnesses,
the rasterized canonical distance with its interpolation bound, and the
skeleton-length inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import geom, rng
from .errors import DomainError, OnCurveError, PreconditionError

NEAR_TOL = 1e-9
PERTURB = (1e-7, math.pi * 1e-7)


@dataclass(frozen=True)
class Curve:
    vertices: tuple
    closed: bool = False

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if not verts:
            raise DomainError("curve needs at least one vertex")
        for a, b in zip(verts, verts[1:]):
            if a == b:
                raise DomainError("consecutive curve vertices must differ")
        if self.closed and len(verts) >= 2 and verts[0] == verts[-1]:
            raise DomainError("closed curve must not repeat its first vertex")

    @property
    def edges(self):
        verts = self.vertices
        out = list(zip(verts, verts[1:]))
        if self.closed and len(verts) >= 2:
            out.append((verts[-1], verts[0]))
        return out


@dataclass(frozen=True)
class CellMeasure:
    kind: str  # "gaussian_field" | "signed_area"
    fld: object = None


def gaussian_measure(fld):
    return CellMeasure("gaussian_field", fld)


def signed_area_measure():
    return CellMeasure("signed_area", None)


@dataclass(frozen=True)
class CurveWitness:
    eta_prime: Curve
    S1: tuple  # convex CCW polygon
    S2: tuple


def close_curve(eta):
    """Append the end-to-start segment (a no-op on closed curves)."""
    if eta.closed:
        return eta
    verts = eta.vertices
    if len(verts) < 2:
        raise DomainError("closing a curve needs at least two vertices")
    if verts[0] == verts[-1]:
        verts = verts[:-1]
        if len(verts) < 2:
            raise DomainError("degenerate curve cannot be closed")
    return Curve(verts, True)


def reverse_curve(eta):
    return Curve(tuple(reversed(eta.vertices)), eta.closed)


def concat_curves(*curves, tol=NEAR_TOL):
    """Join open curves end-to-start; endpoints must match within tol."""
    verts = list(curves[0].vertices)
    if curves[0].closed:
        raise DomainError("can only concatenate open curves")
    for nxt in curves[1:]:
        if nxt.closed:
            raise DomainError("can only concatenate open curves")
        if geom.dist(verts[-1], nxt.vertices[0]) > tol:
            raise DomainError("concatenation endpoints mismatch")
        verts.extend(nxt.vertices[1:])
    return Curve(tuple(verts), False)


def is_simple(eta):
    """No two non-adjacent segments meet; adjacent ones only at the joint."""
    edges = eta.edges
    n = len(edges)
    for i in range(n):
        for j in range(i + 1, n):
            adjacent = (j == i + 1) or (eta.closed and i == 0 and j == n - 1)
            if adjacent:
                shared = edges[i][1] if j == i + 1 else edges[j][1]
                a, b = edges[i]
                c, d = edges[j]
                # the two segments may only meet at their shared endpoint
                other = (a, b, c, d)
                for p in other:
                    if p != shared and \
                            geom.point_segment_distance(p, *edges[i]) <= geom.EPS_GEOM and \
                            geom.point_segment_distance(p, *edges[j]) <= geom.EPS_GEOM:
                        return False
                continue
            if geom.segments_intersect(*edges[i], *edges[j]):
                return False
    return True


# ---------------------------------------------------------------------------
# winding numbers

def _winding_point(z, verts):
    zx, zy = z
    w = 0
    n = len(verts)
    for k in range(n):
        ax, ay = verts[k]
        bx, by = verts[(k + 1) % n]
        if ay <= zy:
            if by > zy and (bx - ax) * (zy - ay) - (by - ay) * (zx - ax) > 0:
                w += 1
        elif by <= zy and (bx - ax) * (zy - ay) - (by - ay) * (zx - ax) < 0:
            w -= 1
    return w


def curve_distance(z, eta):
    return min(geom.point_segment_distance(z, a, b) for a, b in eta.edges)


def winding_number(z, eta):
    """Signed crossing count of the closed curve around z (half-open rule)."""
    if not eta.closed:
        raise DomainError("winding number needs a closed curve")
    if curve_distance(z, eta) <= NEAR_TOL:
        raise OnCurveError("probe point lies on the curve")
    return _winding_point(z, eta.vertices)


def _winding_grid(verts, px, py):
    w = np.zeros(px.shape, dtype=np.int64)
    n = len(verts)
    for k in range(n):
        ax, ay = verts[k]
        bx, by = verts[(k + 1) % n]
        cr = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        w += ((ay <= py) & (by > py) & (cr > 0)).astype(np.int64)
        w -= ((ay > py) & (by <= py) & (cr < 0)).astype(np.int64)
    return w


def _dist_grid(eta, px, py):
    best = np.full(px.shape, np.inf)
    for (ax, ay), (bx, by) in eta.edges:
        dx = bx - ax
        dy = by - ay
        den = dx * dx + dy * dy
        t = np.clip(((px - ax) * dx + (py - ay) * dy) / den, 0.0, 1.0)
        qx = ax + t * dx - px
        qy = ay + t * dy - py
        np.minimum(best, np.hypot(qx, qy), out=best)
    return best


def _perturbed_probes(curves, px, py):
    """Shared probe positions, nudged deterministically off every curve."""
    px = np.asarray(px, dtype=np.float64).copy()
    py = np.asarray(py, dtype=np.float64).copy()
    near = np.zeros(px.shape, dtype=bool)
    for eta in curves:
        near |= _dist_grid(eta, px, py) <= NEAR_TOL
    if near.any():
        px[near] += PERTURB[0]
        py[near] += PERTURB[1]
    return px, py


def shoelace_fraction(verts):
    """Exact rational shoelace value of the closed vertex cycle."""
    total = Fraction(0)
    n = len(verts)
    for k in range(n):
        ax, ay = verts[k]
        bx, by = verts[(k + 1) % n]
        total += Fraction(ax) * Fraction(by) - Fraction(bx) * Fraction(ay)
    return total / 2


def _cell_range(curves):
    xs = [x for eta in curves for x, _ in eta.vertices]
    ys = [y for eta in curves for _, y in eta.vertices]
    x0 = math.floor(min(xs)) - 1
    x1 = math.ceil(max(xs)) + 1
    y0 = math.floor(min(ys)) - 1
    y1 = math.ceil(max(ys)) + 1
    gx, gy = np.meshgrid(np.arange(x0, x1 + 1), np.arange(y0, y1 + 1))
    return gx.ravel(), gy.ravel()


def _nu_gaussian(curves, fld):
    """nu of each closed curve against cell masses, on shared probes."""
    gx, gy = _cell_range(curves)
    mass = fld.values_at(gx, gy)
    px, py = _perturbed_probes(curves, gx.astype(np.float64),
                               gy.astype(np.float64))
    return [float(np.dot(_winding_grid(eta.vertices, px, py), mass))
            for eta in curves]


def nu(eta, mu):
    """Winding-weighted mass of the closed-up curve under the measure."""
    eta = close_curve(eta)
    if mu.kind == "signed_area":
        return float(shoelace_fraction(eta.vertices))
    if mu.kind == "gaussian_field":
        return _nu_gaussian([eta], mu.fld)[0]
    raise DomainError("unknown measure kind %r" % (mu.kind,))


# ---------------------------------------------------------------------------
# decomposition identities

def decompose_check(eta, breakpoints, mu):
    """Coarsen eta along breakpoint indices; residual of the nu identity.

    The identity nu(eta) = nu(coarse) + sum nu(segment_i) holds cell-by-cell;
    for signed_area the residual is computed in exact rational arithmetic and
    is identically zero.
    """
    eta = close_curve(eta)
    verts = eta.vertices
    m = len(verts)
    bps = list(breakpoints)
    if len(bps) < 2 or any(not (0 <= b < m) for b in bps):
        raise DomainError("need >= 2 breakpoint indices inside the curve")
    if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
        raise DomainError("breakpoints must be strictly increasing")
    coarse = Curve(tuple(verts[b] for b in bps), True)
    segments = []
    for j in range(len(bps)):
        if j + 1 < len(bps):
            arc = verts[bps[j]:bps[j + 1] + 1]
        else:
            arc = verts[bps[j]:] + verts[:bps[0] + 1]
        segments.append(close_curve(Curve(arc, False)))
    if mu.kind == "signed_area":
        res = shoelace_fraction(verts) - shoelace_fraction(coarse.vertices)
        for seg in segments:
            res -= shoelace_fraction(seg.vertices)
        return coarse, segments, float(res)
    vals = _nu_gaussian([eta, coarse] + segments, mu.fld)
    residual = vals[0] - vals[1] - sum(vals[2:])
    return coarse, segments, residual


def changing_arc_residual(prefix, arc_a, arc_b, suffix, mu):
    """Residual of nu(eta) - nu(gamma) = nu(arc_a . arc_b^-).

    eta runs prefix-arc_a-suffix and gamma runs prefix-arc_b-suffix; the
    difference is the closed curve arc_a followed by reversed arc_b.
    """
    eta = close_curve(concat_curves(prefix, arc_a, suffix))
    gam = close_curve(concat_curves(prefix, arc_b, suffix))
    diff = close_curve(concat_curves(arc_a, reverse_curve(arc_b)))
    if mu.kind == "signed_area":
        res = (shoelace_fraction(eta.vertices)
               - shoelace_fraction(gam.vertices)
               - shoelace_fraction(diff.vertices))
        return float(res)
    vals = _nu_gaussian([eta, gam, diff], mu.fld)
    return vals[0] - vals[1] - vals[2]


# ---------------------------------------------------------------------------
# splitting and good curves

def is_splitting(eta, S):
    """Endpoints on the boundary of convex S, everything else strictly in."""
    if eta.closed:
        raise DomainError("a splitting curve must be open")
    verts = eta.vertices
    if len(verts) == 1:
        # degenerate point witness: "inside S" is the whole requirement
        return geom.convex_contains(S, verts[0], tol=NEAR_TOL)
    if not is_simple(eta):
        return False
    if not geom.on_convex_boundary(S, verts[0], tol=NEAR_TOL):
        return False
    if not geom.on_convex_boundary(S, verts[-1], tol=NEAR_TOL):
        return False
    for p in verts[1:-1]:
        if not geom.convex_contains(S, p, tol=NEAR_TOL, strict=True):
            return False
    return True


def is_good(eta, witness):
    """eta is good when eta' splits S1 and eta' . eta splits S2."""
    ep = witness.eta_prime
    if len(ep.vertices) == 1:
        if geom.dist(ep.vertices[0], eta.vertices[0]) > NEAR_TOL:
            raise DomainError("witness endpoint does not meet the curve")
        joined = eta
    else:
        joined = concat_curves(ep, eta)
    return is_splitting(ep, witness.S1) and is_splitting(joined, witness.S2)


def probe_max_winding(eta, step=0.5, margin=1.5):
    """max |w| of the closed-up curve over an off-curve probe grid."""
    eta = close_curve(eta)
    xs = [x for x, _ in eta.vertices]
    ys = [y for _, y in eta.vertices]
    gx = np.arange(min(xs) - margin, max(xs) + margin + step, step)
    gy = np.arange(min(ys) - margin, max(ys) + margin + step, step)
    px, py = np.meshgrid(gx, gy)
    px, py = _perturbed_probes([eta], px.ravel(), py.ravel())
    w = _winding_grid(eta.vertices, px, py)
    return int(np.max(np.abs(w)))


# ---------------------------------------------------------------------------
# canonical distance

def d_nu_raster(eta1, eta2, resolution):
    """L2 norm of the winding difference, rastered at `resolution` per unit."""
    if resolution < 1:
        raise DomainError("resolution must be >= 1")
    resolution = int(resolution)
    c1 = close_curve(eta1)
    c2 = close_curve(eta2)
    xs = [x for eta in (c1, c2) for x, _ in eta.vertices]
    ys = [y for eta in (c1, c2) for _, y in eta.vertices]
    x0 = math.floor(min(xs)) - 1
    x1 = math.ceil(max(xs)) + 1
    y0 = math.floor(min(ys)) - 1
    y1 = math.ceil(max(ys)) + 1
    h = 1.0 / resolution
    gx = x0 + h * (np.arange((x1 - x0) * resolution) + 0.5)
    gy = y0 + h * (np.arange((y1 - y0) * resolution) + 0.5)
    px, py = np.meshgrid(gx, gy)
    px, py = _perturbed_probes([c1, c2], px.ravel(), py.ravel())
    w1 = _winding_grid(c1.vertices, px, py)
    w2 = _winding_grid(c2.vertices, px, py)
    d2 = float(np.sum((w1 - w2) ** 2)) * h * h
    return math.sqrt(d2)


def interpolation_bound(v, w):
    """Sum of sqrt(mean adjacent side length x offset) interpolation terms."""
    v = [(float(a), float(b)) for a, b in v]
    w = [(float(a), float(b)) for a, b in w]
    if len(v) != len(w):
        raise DomainError("point sequences must have equal length")
    if len(v) < 2:
        raise DomainError("point sequences need at least two points")
    n = len(v) - 1
    total = 0.0
    for i in range(n + 1):
        w_prev = w[i - 1] if i >= 1 else v[n]
        v_next = v[i + 1] if i < n else w[0]
        span = 0.5 * (geom.dist(w[i], w_prev) + geom.dist(v_next, v[i]))
        total += math.sqrt(span * geom.dist(v[i], w[i]))
    return total


# ---------------------------------------------------------------------------
# skeleton length

def skeleton_length_check(v, rho, R):
    """(lhs, satisfied) for the skeleton inequality lhs >= 1 + rho^2 kappa/40.

    Admissible skeletons start at the origin, end at (R, 0), keep every
    vertex on a level line y = k * rho * R, and move exactly one level per
    step.
    """
    if not (rho > 0.0 and R > 0.0):
        raise PreconditionError("rho and R must be positive")
    pts = [(float(a), float(b)) for a, b in v]
    if len(pts) < 2:
        raise PreconditionError("skeleton needs at least two vertices")
    tol = 1e-9 * max(1.0, rho * R)
    if math.hypot(pts[0][0], pts[0][1]) > tol:
        raise PreconditionError("skeleton must start at the origin")
    if math.hypot(pts[-1][0] - R, pts[-1][1]) > tol:
        raise PreconditionError("skeleton must end at (R, 0)")
    levels = []
    for x, y in pts:
        k = round(y / (rho * R))
        if abs(y - k * rho * R) > tol:
            raise PreconditionError("vertex off every level line: y=%r" % y)
        levels.append(int(k))
    for k1, k2 in zip(levels, levels[1:]):
        if abs(k2 - k1) != 1:
            raise PreconditionError("levels must change by exactly 1")
    kappa = len(pts) - 1
    lhs = sum(geom.dist(a, b) for a, b in zip(pts, pts[1:])) / R
    return lhs, lhs >= 1.0 + rho * rho * kappa / 40.0


# ---------------------------------------------------------------------------
# file format

def save_curve(path, eta):
    with open(path, "w") as fh:
        for x, y in eta.vertices:
            fh.write("%.17g %.17g\n" % (x, y))
        if eta.closed:
            fh.write("#closed\n")


def load_curve(path):
    verts = []
    closed = False
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                closed = closed or line == "#closed"
                continue
            x, y = line.split()
            verts.append((float(x), float(y)))
    return Curve(tuple(verts), closed)


# ---------------------------------------------------------------------------
# generators for property suites (counter-based, reproducible)

def _unit(seed, trial, n, channel):
    idx = np.arange(n, dtype=np.int64) + channel * 1_000_003
    return rng.uniforms(seed, np.full(n, trial, dtype=np.int64), idx)


def gen_convex(seed, trial, channel=0):
    """Random convex polygon (CCW) with a usable interior."""
    for attempt in range(8):
        u = _unit(seed, trial, 24, channel + 11 * attempt)
        pts = [(-5.0 + 10.0 * u[2 * k], -5.0 + 10.0 * u[2 * k + 1])
               for k in range(12)]
        hull = geom.convex_hull(pts)
        if len(hull) >= 5 and abs(geom.polygon_signed_area(hull)) > 4.0:
            return hull
    raise RuntimeError("convex generator failed")  # pragma: no cover


def gen_splitting(seed, trial):
    """(eta, S): an x-monotone chord of a random convex polygon."""
    S = gen_convex(seed, trial)
    a = min(S)
    b = max(S)
    m = 4 + int(_unit(seed, trial, 1, 1)[0] * 5)
    span = b[0] - a[0]
    us = np.sort(_unit(seed, trial, m, 2))
    vs = _unit(seed, trial, m, 3)
    inner = []
    for k in range(m):
        x = a[0] + span * (0.02 + 0.96 * float(us[k]))
        ylo, yhi = geom.vertical_slice(S, x)
        y = ylo + (yhi - ylo) * (0.1 + 0.8 * float(vs[k]))
        inner.append((x, y))
    return Curve((a, *inner, b), False), S


def gen_good(seed, trial):
    """(eta, witness): tail of a splitting curve with a chord witness."""
    zeta, S2 = gen_splitting(seed, trial)
    verts = zeta.vertices
    j = 1 + int(_unit(seed, trial, 1, 4)[0] * (len(verts) - 2))
    a = verts[0]
    x1 = verts[j]
    eta = Curve(verts[j:], False)
    eta_prime = Curve((a, x1), False)
    cx = 0.5 * (a[0] + x1[0])
    cy = 0.5 * (a[1] + x1[1])
    rad = 0.5 * geom.dist(a, x1)
    phi = math.atan2(a[1] - cy, a[0] - cx)
    ring = []
    for k in range(16):
        if k == 0:
            ring.append(a)
        elif k == 8:
            ring.append(x1)
        else:
            ang = phi + 2.0 * math.pi * k / 16.0
            ring.append((cx + rad * math.cos(ang), cy + rad * math.sin(ang)))
    return eta, CurveWitness(eta_prime, tuple(ring), tuple(S2))


def _clip_convex(poly, keep, cut):
    """One half-plane clip; keep(p) >= 0 stays, cut(p, q) intersects edge."""
    out = []
    n = len(poly)
    for i in range(n):
        p = poly[i]
        q = poly[(i + 1) % n]
        kp = keep(p)
        kq = keep(q)
        if kp >= 0:
            out.append(p)
            if kq < 0:
                out.append(cut(p, q))
        elif kq >= 0:
            out.append(cut(p, q))
    return out


def clip_convex_x(poly, xlo, xhi):
    """Convex polygon intersected with the vertical strip xlo <= x <= xhi."""

    def cut_at(x0):
        def cut(p, q):
            t = (x0 - p[0]) / (q[0] - p[0])
            return (x0, p[1] + t * (q[1] - p[1]))
        return cut

    poly = _clip_convex(list(poly), lambda p: p[0] - xlo, cut_at(xlo))
    poly = _clip_convex(poly, lambda p: xhi - p[0], cut_at(xhi))
    dedup = [p for k, p in enumerate(poly) if p != poly[k - 1]]
    return dedup


def strip_partition(eta, S, breakpoints):
    """Split a splitting curve at vertex indices into per-strip good pieces.

    Returns (segment, witness) pairs: each piece splits the vertical slab of
    S spanned by its endpoints, with a degenerate point witness at its start.
    """
    verts = eta.vertices
    bps = [0] + list(breakpoints) + [len(verts) - 1]
    if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
        raise DomainError("breakpoints must be strictly increasing interior "
                          "indices")
    out = []
    for j in range(len(bps) - 1):
        piece = Curve(verts[bps[j]:bps[j + 1] + 1], False)
        xlo = min(piece.vertices[0][0], piece.vertices[-1][0])
        xhi = max(piece.vertices[0][0], piece.vertices[-1][0])
        slab = tuple(clip_convex_x(S, xlo, xhi))
        start = piece.vertices[0]
        box = ((start[0] - 0.1, start[1] - 0.1), (start[0] + 0.1, start[1] - 0.1),
               (start[0] + 0.1, start[1] + 0.1), (start[0] - 0.1, start[1] + 0.1))
        out.append((piece, CurveWitness(Curve((start,), False), box, slab)))
    return out


def gen_closed(seed, trial, m=None, channel=6):
    """Random closed curve (possibly self-intersecting)."""
    if m is None:
        m = 6 + int(_unit(seed, trial, 1, channel)[0] * 7)
    u = _unit(seed, trial, 2 * m, channel + 1)
    verts = [(-6.0 + 12.0 * float(u[2 * k]), -6.0 + 12.0 * float(u[2 * k + 1]))
             for k in range(m)]
    return Curve(tuple(verts), True)


def gen_decomposition(seed, trial):
    """(closed curve, strictly increasing breakpoint indices)."""
    eta = gen_closed(seed, trial)
    m = len(eta.vertices)
    u = _unit(seed, trial, m, 9)
    k = max(2, int(u[0] * (m - 1)))
    order = np.argsort(u)
    bps = sorted(int(i) for i in order[:k])
    return eta, bps


def gen_pair_sequences(seed, trial):
    """(v, w): a random polyline and a [1,4]-offset companion."""
    n = 4 + int(_unit(seed, trial, 1, 12)[0] * 5)
    ang = _unit(seed, trial, n + 1, 13) * (2.0 * math.pi)
    stp = 1.0 + 2.0 * _unit(seed, trial, n + 1, 14)
    off_ang = _unit(seed, trial, n + 1, 15) * (2.0 * math.pi)
    off_len = 1.0 + 3.0 * _unit(seed, trial, n + 1, 16)
    v = [(0.0, 0.0)]
    for k in range(n):
        v.append((v[-1][0] + stp[k] * math.cos(ang[k]),
                  v[-1][1] + stp[k] * math.sin(ang[k])))
    w = [(v[k][0] + off_len[k] * math.cos(off_ang[k]),
          v[k][1] + off_len[k] * math.sin(off_ang[k])) for k in range(n + 1)]
    return v, w


def gen_skeleton(seed, trial, kappa, rho, R=1.0):
    """Admissible skeleton: sorted-uniform xs, +-1 level random bridge."""
    if kappa < 2 or kappa % 2:
        raise DomainError("kappa must be an even integer >= 2")
    u = _unit(seed, trial, kappa - 1, 18)
    xs = [0.0] + sorted(float(R * t) for t in u) + [float(R)]
    ups = np.concatenate([np.ones(kappa // 2, dtype=np.int64),
                          -np.ones(kappa // 2, dtype=np.int64)])
    perm = np.argsort(_unit(seed, trial, kappa, 19))
    steps = ups[perm]
    ks = np.concatenate([[0], np.cumsum(steps)])
    return [(xs[j], float(ks[j]) * rho * R) for j in range(kappa + 1)]
