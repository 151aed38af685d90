"""Planar geometry shared by the polygon construction and the curve calculus.

Everything works on plain ``(x, y)`` float tuples.  Predicates use a distance
tolerance ``EPS_GEOM`` = 1e-12 in the coordinates' own units unless noted;
lattice-membership tests widen that to 1e-9 so points lying exactly on edges
survive roundoff.
"""

from __future__ import annotations

import math

import numpy as np

EPS_GEOM = 1e-12
EPS_LATTICE = 1e-9


def cross(o, a, b):
    """Signed parallelogram area of (a-o, b-o); >0 means left turn."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def dist(a, b):
    return math.hypot(a[0] - b[0], a[1] - b[1])


def signed_line_distance(p, a, b):
    """Perpendicular signed distance from p to line ab (positive left)."""
    L = dist(a, b)
    if L == 0.0:
        return dist(p, a)
    return cross(a, b, p) / L


def point_segment_distance(p, a, b):
    ax, ay = a
    bx, by = b
    px, py = p
    dx, dy = bx - ax, by - ay
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / L2
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def segments_intersect(p, q, a, b, tol=EPS_GEOM):
    """Closed-segment intersection test (shared endpoints count)."""
    d1 = cross(a, b, p)
    d2 = cross(a, b, q)
    d3 = cross(p, q, a)
    d4 = cross(p, q, b)
    scale = max(1.0, abs(a[0] - b[0]) + abs(a[1] - b[1]),
                abs(p[0] - q[0]) + abs(p[1] - q[1]))
    t = tol * scale
    if ((d1 > t and d2 < -t) or (d1 < -t and d2 > t)) and \
       ((d3 > t and d4 < -t) or (d3 < -t and d4 > t)):
        return True
    # collinear / touching cases via point-on-segment distance
    for z, s0, s1 in ((p, a, b), (q, a, b), (a, p, q), (b, p, q)):
        if point_segment_distance(z, s0, s1) <= t:
            return True
    return False


def triangle_area(a, b, c):
    return abs(cross(a, b, c)) / 2.0


def point_in_triangle(p, a, b, c, tol=EPS_LATTICE):
    """Closed containment: within distance tol of the triangle counts in."""
    s = cross(a, b, c)
    if s == 0.0:
        return point_segment_distance(p, a, b) <= tol and \
            point_segment_distance(p, a, c) <= tol
    if s < 0.0:
        a, b = b, a
    for u, v in ((a, b), (b, c), (c, a)):
        if signed_line_distance(p, u, v) < -tol:
            return False
    return True


def segment_intersects_triangle(p, q, a, b, c, tol=EPS_GEOM):
    """Does closed segment pq meet closed triangle abc anywhere?"""
    if point_in_triangle(p, a, b, c, tol) or point_in_triangle(q, a, b, c, tol):
        return True
    for u, v in ((a, b), (b, c), (c, a)):
        if segments_intersect(p, q, u, v, tol):
            return True
    return False


def triangles_disjoint(t1, t2, tol=EPS_GEOM):
    """True iff the two closed triangles share no point."""
    a, b, c = t1
    for u, v in ((a, b), (b, c), (c, a)):
        if segment_intersects_triangle(u, v, *t2, tol=tol):
            return False
    for z in t2:
        if point_in_triangle(z, a, b, c, tol):
            return False
    return True


def triangle_lattice_points(a, b, c, tol=EPS_LATTICE):
    """Integer points in the closed triangle, row-major (y asc, x asc).

    Returns ``(xs, ys)`` int64 arrays.  Small bounding boxes use a vectorized
    half-plane test; large ones fall back to a per-row interval scan (the
    cross-section of a triangle at fixed y is an interval).
    """
    ymin = min(a[1], b[1], c[1])
    ymax = max(a[1], b[1], c[1])
    xmin = min(a[0], b[0], c[0])
    xmax = max(a[0], b[0], c[0])
    y0 = math.ceil(ymin - tol)
    y1 = math.floor(ymax + tol)
    x0 = math.ceil(xmin - tol)
    x1 = math.floor(xmax + tol)
    if y1 < y0 or x1 < x0:
        return (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
    if (x1 - x0 + 1) * (y1 - y0 + 1) <= 20000:
        gx, gy = np.meshgrid(np.arange(x0, x1 + 1), np.arange(y0, y1 + 1))
        gx = gx.ravel()
        gy = gy.ravel()
        s = cross(a, b, c)
        if s == 0.0:
            keep = [i for i in range(len(gx))
                    if point_in_triangle((gx[i], gy[i]), a, b, c, tol)]
            return gx[keep].astype(np.int64), gy[keep].astype(np.int64)
        if s < 0.0:
            b, c = c, b
        mask = np.ones(len(gx), dtype=bool)
        for u, v in ((a, b), (b, c), (c, a)):
            L = dist(u, v)
            d = ((v[0] - u[0]) * (gy - u[1]) - (v[1] - u[1]) * (gx - u[0])) / L
            mask &= d >= -tol
        return gx[mask].astype(np.int64), gy[mask].astype(np.int64)
    # row scan
    xs_out = []
    ys_out = []
    edges = ((a, b), (b, c), (c, a))
    for y in range(y0, y1 + 1):
        lo = math.inf
        hi = -math.inf
        for u, v in edges:
            uy, vy = u[1], v[1]
            if abs(uy - vy) <= tol:
                if abs(y - uy) <= tol:
                    lo = min(lo, u[0], v[0])
                    hi = max(hi, u[0], v[0])
                continue
            if min(uy, vy) - tol <= y <= max(uy, vy) + tol:
                t = (y - uy) / (vy - uy)
                t = min(1.0, max(0.0, t))
                x = u[0] + t * (v[0] - u[0])
                lo = min(lo, x)
                hi = max(hi, x)
        if lo > hi:
            continue
        xa = math.ceil(lo - tol)
        xb = math.floor(hi + tol)
        if xb >= xa:
            xs_out.append(np.arange(xa, xb + 1, dtype=np.int64))
            ys_out.append(np.full(xb - xa + 1, y, dtype=np.int64))
    if not xs_out:
        return (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
    return np.concatenate(xs_out), np.concatenate(ys_out)


def polygon_perimeter(vertices):
    n = len(vertices)
    return sum(dist(vertices[i], vertices[(i + 1) % n]) for i in range(n))


def polygon_signed_area(vertices):
    n = len(vertices)
    s = 0.0
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return s / 2.0


def polygon_lattice_points(vertices, tol=EPS_LATTICE):
    """Integer points in the closed simple polygon, row-major, deduplicated.

    Strict-interior points come from an even-odd scanline (half-open vertex
    rule on the crossing parity); boundary lattice points are enumerated per
    edge and unioned in, so points exactly on the outline are included.
    """
    n = len(vertices)
    ys_v = [v[1] for v in vertices]
    y0 = math.ceil(min(ys_v) - tol)
    y1 = math.floor(max(ys_v) + tol)
    interior = {}  # y -> list of x arrays
    extra = {}  # y -> set of boundary xs

    # boundary lattice points, edge by edge
    for i in range(n):
        ax, ay = vertices[i]
        bx, by = vertices[(i + 1) % n]
        if abs(ay - by) <= tol:
            ry = round(ay)
            if abs(ay - ry) <= tol:
                xa = math.ceil(min(ax, bx) - tol)
                xb = math.floor(max(ax, bx) + tol)
                if xb >= xa:
                    interior.setdefault(int(ry), []).append(
                        np.arange(xa, xb + 1, dtype=np.int64))
            continue
        if abs(ax - bx) <= tol:
            rx = round(ax)
            if abs(ax - rx) <= tol:
                for y in range(math.ceil(min(ay, by) - tol),
                               math.floor(max(ay, by) + tol) + 1):
                    extra.setdefault(y, set()).add(int(rx))
            continue
        for y in range(math.ceil(min(ay, by)), math.floor(max(ay, by)) + 1):
            t = (y - ay) / (by - ay)
            if -tol <= t <= 1.0 + tol:
                x = ax + t * (bx - ax)
                rx = round(x)
                if abs(x - rx) <= tol:
                    extra.setdefault(y, set()).add(int(rx))

    # scanline interior (even-odd with the half-open vertex rule)
    for y in range(y0, y1 + 1):
        xs_cross = []
        for i in range(n):
            ax, ay = vertices[i]
            bx, by = vertices[(i + 1) % n]
            if ay == by:
                continue
            if (ay <= y < by) or (by <= y < ay):
                xs_cross.append(ax + (y - ay) * (bx - ax) / (by - ay))
        xs_cross.sort()
        for k in range(0, len(xs_cross) - 1, 2):
            xa = math.ceil(xs_cross[k] + tol)
            xb = math.floor(xs_cross[k + 1] - tol)
            if xb >= xa:
                interior.setdefault(y, []).append(
                    np.arange(xa, xb + 1, dtype=np.int64))

    xs_out = []
    ys_out = []
    for y in sorted(set(interior) | set(extra)):
        parts = interior.get(y, [])
        ex = extra.get(y)
        if ex:
            parts.append(np.sort(np.fromiter(ex, dtype=np.int64, count=len(ex))))
        xs = parts[0] if len(parts) == 1 else np.unique(np.concatenate(parts))
        xs_out.append(xs)
        ys_out.append(np.full(len(xs), y, dtype=np.int64))
    if not xs_out:
        return (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
    return np.concatenate(xs_out), np.concatenate(ys_out)


def point_in_simple_polygon(p, vertices, tol=EPS_GEOM):
    """Closed containment in a simple polygon (even-odd; boundary counts in)."""
    n = len(vertices)
    px, py = p
    for i in range(n):
        if point_segment_distance(p, vertices[i], vertices[(i + 1) % n]) <= tol:
            return True
    inside = False
    for i in range(n):
        ax, ay = vertices[i]
        bx, by = vertices[(i + 1) % n]
        if ay == by:
            continue
        if (ay <= py < by) or (by <= py < ay):
            x = ax + (py - ay) * (bx - ax) / (by - ay)
            if x > px:
                inside = not inside
    return inside


def lattice_boundary_count(xs, ys):
    """|∂A| for the site set given as coordinate arrays, via mask shifts."""
    if len(xs) == 0:
        return 0
    x0 = int(xs.min())
    y0 = int(ys.min())
    W = int(xs.max()) - x0 + 1
    H = int(ys.max()) - y0 + 1
    mask = np.zeros((H + 2, W + 2), dtype=bool)
    mask[ys - y0 + 1, xs - x0 + 1] = True
    count = 0
    for dy, dx in ((0, 1), (0, -1), (1, 0), (-1, 0)):
        count += int(np.sum(mask & ~np.roll(np.roll(mask, dy, 0), dx, 1)))
    return count


def convex_hull(points):
    """Andrew monotone chain; returns CCW hull without repeated last point."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def convex_min_signed_distance(poly, p):
    """Min over edges of the signed distance from p (CCW poly: >0 inside)."""
    n = len(poly)
    best = math.inf
    for i in range(n):
        a = poly[i]
        b = poly[(i + 1) % n]
        best = min(best, signed_line_distance(p, a, b))
    return best


def convex_contains(poly, p, tol=EPS_LATTICE, strict=False):
    d = convex_min_signed_distance(poly, p)
    return d > tol if strict else d >= -tol


def on_convex_boundary(poly, p, tol=EPS_LATTICE):
    return abs(convex_min_signed_distance(poly, p)) <= tol


def vertical_slice(poly, x):
    """[ylo, yhi] of the CCW convex polygon at abscissa x (None if outside)."""
    n = len(poly)
    ys = []
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        if ax == bx:
            if ax == x:
                ys.extend([ay, by])
            continue
        t = (x - ax) / (bx - ax)
        if -1e-12 <= t <= 1.0 + 1e-12:
            ys.append(ay + t * (by - ay))
    if not ys:
        return None
    return min(ys), max(ys)
