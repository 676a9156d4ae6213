"""Exact 2D primitives: points, lines, segments, polygons, reflections.

Lines are stored in normal/offset form ``{p : n . p = d}`` with a canonical
representation (unit normal, ``d >= 0``, deterministic sign tie-break) so that
two constructions of the same geometric line compare equal field-wise. That
canonical form is what makes wall comparison and line fusion elsewhere in the
package a matter of plain arithmetic instead of ad-hoc geometric equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import DegenerateInput
from .tolerances import TOL

__all__ = [
    "Point2",
    "Line2",
    "Segment2",
    "Polygon2",
    "mirror_point",
    "wall_line_from_source_and_is",
    "line_intersection",
    "point_side",
    "polygon_contains",
    "distance_to_boundary",
]


@dataclass(frozen=True)
class Point2:
    """A point (or free vector) in the plane, coordinates in meters."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DegenerateInput(f"non-finite coordinates ({self.x}, {self.y})")

    def __add__(self, other: "Point2") -> "Point2":
        return Point2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Point2") -> "Point2":
        return Point2(self.x - other.x, self.y - other.y)

    def scaled(self, s: float) -> "Point2":
        return Point2(self.x * s, self.y * s)

    def dot(self, other: "Point2") -> float:
        return self.x * other.x + self.y * other.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def distance_to(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Line2:
    """Infinite line {p : normal . p = offset} with unit normal.

    Canonical form: offset >= 0 (the normal points from the origin toward the
    line). When the line passes through the origin (|offset| <= geom_eps) the
    sign is fixed by requiring normal.x > 0, or normal.y > 0 when normal.x
    vanishes.
    """

    normal: Point2
    offset: float

    def __post_init__(self) -> None:
        n = self.normal.norm()
        if n < TOL.min_segment_len:
            raise DegenerateInput("zero-length line normal")
        nx, ny, d = self.normal.x / n, self.normal.y / n, self.offset / n
        if d < -TOL.geom_eps:
            nx, ny, d = -nx, -ny, -d
        elif abs(d) <= TOL.geom_eps:
            if nx < -TOL.geom_eps or (abs(nx) <= TOL.geom_eps and ny < 0.0):
                nx, ny, d = -nx, -ny, -d
        object.__setattr__(self, "normal", Point2(nx, ny))
        object.__setattr__(self, "offset", d)

    @classmethod
    def from_points(cls, a: Point2, b: Point2) -> "Line2":
        """Line through two distinct points."""
        if a.distance_to(b) < TOL.min_segment_len:
            raise DegenerateInput("line through coincident points")
        n = Point2(b.y - a.y, a.x - b.x)  # perpendicular to b - a
        return cls(n, n.dot(a))

    def angle(self) -> float:
        """Normal direction folded into [0, pi); equal for identical lines."""
        a = math.atan2(self.normal.y, self.normal.x) % math.pi
        return a if a < math.pi else 0.0

    def foot_from(self, p: Point2) -> Point2:
        """Perpendicular foot vector from p to the line (not the foot point)."""
        s = self.offset - self.normal.dot(p)
        return Point2(self.normal.x * s, self.normal.y * s)

    def project(self, p: Point2) -> Point2:
        """Orthogonal projection of p onto the line."""
        return p + self.foot_from(p)

    def tangent(self) -> Point2:
        """Canonical tangent: the normal rotated +90 degrees."""
        return Point2(-self.normal.y, self.normal.x)


@dataclass(frozen=True)
class Segment2:
    """Finite segment between two distinct endpoints."""

    a: Point2
    b: Point2

    def __post_init__(self) -> None:
        if self.a.distance_to(self.b) <= TOL.min_segment_len:
            raise DegenerateInput("degenerate segment (length <= 1e-9 m)")

    def line(self) -> Line2:
        return Line2.from_points(self.a, self.b)

    def length(self) -> float:
        return self.a.distance_to(self.b)


def _seg_point_distance(seg: Segment2, p: Point2) -> float:
    d = seg.b - seg.a
    t = (p - seg.a).dot(d) / d.dot(d)
    t = min(1.0, max(0.0, t))
    closest = seg.a + d.scaled(t)
    return closest.distance_to(p)


def _segments_cross(p: Segment2, q: Segment2) -> bool:
    """True when the two segments share any point (touching counts)."""

    def orient(a: Point2, b: Point2, c: Point2) -> float:
        return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)

    o1 = orient(p.a, p.b, q.a)
    o2 = orient(p.a, p.b, q.b)
    o3 = orient(q.a, q.b, p.a)
    o4 = orient(q.a, q.b, p.b)
    if ((o1 > 0) != (o2 > 0)) and ((o3 > 0) != (o4 > 0)) and o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0:
        return True
    eps = TOL.geom_eps
    return (
        _seg_point_distance(p, q.a) <= eps
        or _seg_point_distance(p, q.b) <= eps
        or _seg_point_distance(q, p.a) <= eps
        or _seg_point_distance(q, p.b) <= eps
    )


@dataclass(frozen=True)
class Polygon2:
    """Simple polygon with counter-clockwise vertex order."""

    vertices: tuple[Point2, ...]

    def __post_init__(self) -> None:
        verts = tuple(self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise DegenerateInput("polygon needs at least 3 vertices")
        if self.signed_area() <= 0.0:
            raise DegenerateInput("polygon must be counter-clockwise with positive area")
        n = len(verts)
        edges = self.edges()
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue  # adjacent edges share a vertex by construction
                if _segments_cross(edges[i], edges[j]):
                    raise DegenerateInput("polygon is self-intersecting")

    def signed_area(self) -> float:
        s = 0.0
        v = self.vertices
        for i in range(len(v)):
            a, b = v[i], v[(i + 1) % len(v)]
            s += a.x * b.y - b.x * a.y
        return 0.5 * s

    def edges(self) -> tuple[Segment2, ...]:
        v = self.vertices
        return tuple(Segment2(v[i], v[(i + 1) % len(v)]) for i in range(len(v)))

    def centroid(self) -> Point2:
        v = self.vertices
        return Point2(sum(p.x for p in v) / len(v), sum(p.y for p in v) / len(v))


def mirror_point(p: Point2, l: Line2) -> Point2:
    """Reflect p across l; the midpoint of (p, result) lies on l."""
    s = l.normal.dot(p) - l.offset
    return Point2(p.x - 2.0 * s * l.normal.x, p.y - 2.0 * s * l.normal.y)


def wall_line_from_source_and_is(source: Point2, image: Point2) -> Line2:
    """Perpendicular bisector of (source, image): the wall that mirrors one
    onto the other."""
    if source.distance_to(image) <= TOL.min_source_is_dist:
        raise DegenerateInput("source and image source coincide; no wall line")
    n = image - source
    mid = Point2(0.5 * (source.x + image.x), 0.5 * (source.y + image.y))
    return Line2(n, n.dot(mid))


def line_intersection(l1: Line2, l2: Line2) -> Optional[Point2]:
    """Intersection point, or None for (near-)parallel lines."""
    cross = l1.normal.x * l2.normal.y - l1.normal.y * l2.normal.x
    if abs(cross) < TOL.parallel_eps:
        return None
    x = (l1.offset * l2.normal.y - l2.offset * l1.normal.y) / cross
    y = (l1.normal.x * l2.offset - l2.normal.x * l1.offset) / cross
    return Point2(x, y)


def point_side(p: Point2, l: Line2) -> float:
    """Signed perpendicular distance of p from l (sign per canonical normal)."""
    return l.normal.dot(p) - l.offset


def distance_to_boundary(poly: Polygon2, p: Point2) -> float:
    """Distance from p to the nearest polygon edge."""
    return min(_seg_point_distance(e, p) for e in poly.edges())


def polygon_contains(poly: Polygon2, p: Point2) -> bool:
    """Strict interior test; points within geom_eps of the boundary are out."""
    if distance_to_boundary(poly, p) <= TOL.geom_eps:
        return False
    # Even-odd ray cast toward +x.
    inside = False
    v = poly.vertices
    n = len(v)
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        if (a.y > p.y) != (b.y > p.y):
            x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y)
            if x_cross > p.x:
                inside = not inside
    return inside


def polygon_contains_with_margin(poly: Polygon2, p: Point2, margin: float) -> bool:
    """Interior test requiring clearance >= margin from every wall."""
    if not polygon_contains(poly, p):
        return False
    return distance_to_boundary(poly, p) >= margin


def rectangle(width: float, height: float, origin: Point2 = Point2(0.0, 0.0)) -> Polygon2:
    """Axis-aligned CCW rectangle with its lower-left corner at origin."""
    if width <= 0 or height <= 0:
        raise DegenerateInput("rectangle sides must be positive")
    o = origin
    return Polygon2(
        (
            Point2(o.x, o.y),
            Point2(o.x + width, o.y),
            Point2(o.x + width, o.y + height),
            Point2(o.x, o.y + height),
        )
    )
