"""2D geometry primitives for road networks and placement.

Everything works on plain ``(x, y)`` float tuples; angles are radians,
counterclockwise, with 0 pointing along +x.
"""

from __future__ import annotations

import math

Point = tuple[float, float]


def dist(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def normalize_angle(theta: float) -> float:
    """Wrap into (-pi, pi]."""
    theta = math.fmod(theta, 2 * math.pi)
    if theta > math.pi:
        theta -= 2 * math.pi
    elif theta <= -math.pi:
        theta += 2 * math.pi
    return theta


def heading_of(a: Point, b: Point) -> float:
    return math.atan2(b[1] - a[1], b[0] - a[0])


def polyline_length(points: list[Point]) -> float:
    return sum(dist(points[i], points[i + 1]) for i in range(len(points) - 1))


def point_at_arclength(points: list[Point], s: float) -> tuple[Point, float]:
    """Position and tangent heading at arc length ``s`` along the polyline."""
    if len(points) < 2:
        raise ValueError("polyline needs at least 2 points")
    remaining = max(0.0, s)
    for i in range(len(points) - 1):
        seg = dist(points[i], points[i + 1])
        if remaining <= seg or i == len(points) - 2:
            if seg == 0.0:
                continue
            t = min(1.0, remaining / seg)
            x = points[i][0] + t * (points[i + 1][0] - points[i][0])
            y = points[i][1] + t * (points[i + 1][1] - points[i][1])
            return (x, y), heading_of(points[i], points[i + 1])
        remaining -= seg
    return points[-1], heading_of(points[-2], points[-1])


def vertex_heading(points: list[Point], index: int) -> float:
    """Tangent heading at a vertex: the segment leading into it, or out of
    the first vertex."""
    n = len(points)
    i = index % n
    if i == 0:
        return heading_of(points[0], points[1])
    return heading_of(points[i - 1], points[i])


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    ax, ay = a
    bx, by = b
    px, py = p
    dx, dy = bx - ax, by - ay
    seg2 = dx * dx + dy * dy
    if seg2 == 0.0:
        return dist(p, a)
    t = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / seg2))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def point_in_ring(p: Point, ring: list[Point]) -> bool:
    """Even-odd rule; the ring closes implicitly."""
    x, y = p
    inside = False
    j = len(ring) - 1
    for i in range(len(ring)):
        xi, yi = ring[i]
        xj, yj = ring[j]
        if (yi > y) != (yj > y):
            x_cross = (xj - xi) * (y - yi) / (yj - yi) + xi
            if x < x_cross:
                inside = not inside
        j = i
    return inside


def ring_boundary_distance(p: Point, ring: list[Point]) -> float:
    best = math.inf
    j = len(ring) - 1
    for i in range(len(ring)):
        best = min(best, point_segment_distance(p, ring[j], ring[i]))
        j = i
    return best


def segments_intersect(p1: Point, p2: Point, p3: Point, p4: Point) -> bool:
    def orient(a: Point, b: Point, c: Point) -> float:
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True

    def on_segment(a: Point, b: Point, c: Point) -> bool:
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    if d1 == 0 and on_segment(p3, p4, p1):
        return True
    if d2 == 0 and on_segment(p3, p4, p2):
        return True
    if d3 == 0 and on_segment(p1, p2, p3):
        return True
    if d4 == 0 and on_segment(p1, p2, p4):
        return True
    return False


def ring_is_simple(ring: list[Point]) -> bool:
    """No two non-adjacent edges intersect."""
    n = len(ring)
    if n < 3:
        return False
    edges = [(ring[i], ring[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j - i) % n in (1, n - 1):
                continue
            if segments_intersect(*edges[i], *edges[j]):
                return False
    return True


def sample_polyline(points: list[Point], step: float) -> list[Point]:
    """Points spaced ``step`` apart by arc length, endpoints included."""
    total = polyline_length(points)
    if total == 0.0:
        return [points[0]]
    count = max(1, math.ceil(total / step))
    return [point_at_arclength(points, total * i / count)[0] for i in range(count + 1)]


def min_polyline_distance(a: list[Point], b: list[Point], step: float) -> float:
    """Min distance between two polylines, sampled at ``step`` resolution."""
    pa = sample_polyline(a, step)
    pb = sample_polyline(b, step)
    return min(dist(p, q) for p in pa for q in pb)


def offset_point(p: Point, heading: float, side: str, distance: float) -> tuple[Point, float]:
    """Perpendicular offset: right is heading - 90 deg, left is heading + 90 deg."""
    angle = heading + (math.pi / 2 if side == "left" else -math.pi / 2)
    return (p[0] + distance * math.cos(angle), p[1] + distance * math.sin(angle)), heading


def segment_quad(a: Point, b: Point, half_width: float) -> list[Point]:
    """Rectangle covering a centerline segment buffered by half_width."""
    h = heading_of(a, b)
    nx, ny = -math.sin(h) * half_width, math.cos(h) * half_width
    return [(a[0] + nx, a[1] + ny), (b[0] + nx, b[1] + ny),
            (b[0] - nx, b[1] - ny), (a[0] - nx, a[1] - ny)]
