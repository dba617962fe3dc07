"""Planar geometric predicates used by all routing decisions."""
import math
from enum import Enum, IntEnum
from typing import Literal, Optional, Sequence

from attrs import field, frozen

# Cross products below this magnitude (area units squared) are collinear.
COLLINEAR_TOLERANCE = 1e-12

TWO_PI = 2.0 * math.pi


def _finite(instance, attribute, value):
    if not math.isfinite(value):
        raise ValueError(f"{attribute.name} must be finite, got {value!r}")


@frozen
class Point:
    """A point in the plane.

    Attributes:
        x: the horizontal coordinate (area units).
        y: the vertical coordinate (area units).
    """

    x: float = field(converter=float, validator=_finite)
    y: float = field(converter=float, validator=_finite)

    def __sub__(self, other: "Point") -> "Point":
        return Point(self.x - other.x, self.y - other.y)

    def as_tuple(self):
        return (self.x, self.y)


def _distinct(instance, attribute, value):
    if value == instance.a:
        raise ValueError("A segment needs two distinct end points.")


@frozen
class Segment:
    """A straight segment between two distinct points."""

    a: Point
    b: Point = field(validator=_distinct)


class Orientation(IntEnum):
    """Turn direction of an ordered triple of points.

    The values are signs, so negating a member gives the opposite turn.
    """

    CLOCKWISE = -1
    COLLINEAR = 0
    COUNTER_CLOCKWISE = 1


class Sense(str, Enum):
    """Rotation sense."""

    CW = "CW"
    CCW = "CCW"


@frozen
class Intersection:
    """Result of intersecting two segments.

    Attributes:
        kind: `proper` when the interiors cross, `touching` when an end
            point of one segment lies on the other one.
        point: the intersection point (for collinear overlaps, the first
            overlapping end point).
    """

    kind: Literal["proper", "touching"]
    point: Point

    @property
    def is_proper(self) -> bool:
        return self.kind == "proper"


def cross(p: Point, q: Point, r: Point) -> float:
    """Cross product of (q - p) and (r - p)."""
    return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)


def orientation(p: Point, q: Point, r: Point) -> Orientation:
    """Orientation of the triple `p`, `q`, `r`."""
    value = cross(p, q, r)
    if abs(value) < COLLINEAR_TOLERANCE:
        return Orientation.COLLINEAR
    return (
        Orientation.COUNTER_CLOCKWISE if value > 0 else Orientation.CLOCKWISE
    )


def dist(p: Point, q: Point) -> float:
    """Euclidean distance between two points."""
    return math.hypot(q.x - p.x, q.y - p.y)


def reflect(p: Point) -> Point:
    """Mirror a point about the vertical axis."""
    return Point(-p.x, p.y)


def _on_segment(p: Point, q: Point, r: Point) -> bool:
    """Tell if `r`, known to be collinear with `p` and `q`, lies on pq."""
    return (
        min(p.x, q.x) - COLLINEAR_TOLERANCE
        <= r.x
        <= max(p.x, q.x) + COLLINEAR_TOLERANCE
        and min(p.y, q.y) - COLLINEAR_TOLERANCE
        <= r.y
        <= max(p.y, q.y) + COLLINEAR_TOLERANCE
    )


def segments_intersect(s1: Segment, s2: Segment) -> Optional[Intersection]:
    """Classify the intersection of two segments.

    Returns:
        None when the segments are disjoint, otherwise an `Intersection`
        of kind `proper` (the interiors cross) or `touching` (an end point
        of one of them lies on the other).
    """
    p1, p2, q1, q2 = s1.a, s1.b, s2.a, s2.b
    o1 = orientation(p1, p2, q1)
    o2 = orientation(p1, p2, q2)
    o3 = orientation(q1, q2, p1)
    o4 = orientation(q1, q2, p2)

    if (
        o1 != Orientation.COLLINEAR
        and o2 != Orientation.COLLINEAR
        and o3 != Orientation.COLLINEAR
        and o4 != Orientation.COLLINEAR
    ):
        if o1 != o2 and o3 != o4:
            d1 = cross(q1, q2, p1)
            d2 = cross(q1, q2, p2)
            t = d1 / (d1 - d2)
            return Intersection(
                kind="proper",
                point=Point(
                    p1.x + t * (p2.x - p1.x), p1.y + t * (p2.y - p1.y)
                ),
            )
        return None

    # At least one end point is collinear with the other segment.
    for collinear, a, b, c in (
        (o1, p1, p2, q1),
        (o2, p1, p2, q2),
        (o3, q1, q2, p1),
        (o4, q1, q2, p2),
    ):
        if collinear == Orientation.COLLINEAR and _on_segment(a, b, c):
            return Intersection(kind="touching", point=c)
    return None


def angle_of(center: Point, target: Point) -> float:
    """Direction of `target` seen from `center`, in [0, 2*pi)."""
    angle = math.atan2(target.y - center.y, target.x - center.x)
    if angle < 0:
        angle += TWO_PI
    return angle


def rotation(start: float, end: float, sense: Sense) -> float:
    """Rotation needed to reach angle `end` from angle `start`.

    The result is in [0, 2*pi).
    """
    delta = end - start if sense == Sense.CCW else start - end
    delta = math.fmod(delta, TWO_PI)
    if delta < 0:
        delta += TWO_PI
    return delta


def angle_order_after(
    center: Point,
    from_: Point,
    candidates: Sequence[Point],
    sense: Sense,
) -> Point:
    """First candidate met when rotating away from the `from_` direction.

    A candidate lying exactly in the `from_` direction is eligible, but
    only after a full turn; this lets a pendant node bounce a token back
    along the edge it arrived on.

    Raises:
        ValueError: when `candidates` is empty.
    """
    if not candidates:
        raise ValueError("No candidate to choose from.")
    start = angle_of(center, from_)
    best, best_delta = None, math.inf
    for candidate in candidates:
        delta = rotation(start, angle_of(center, candidate), sense)
        if delta < 1e-15:
            delta = TWO_PI
        if delta < best_delta:
            best, best_delta = candidate, delta
    assert best is not None
    return best
