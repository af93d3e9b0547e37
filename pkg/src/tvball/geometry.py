"""Two-ball datum and exact arc-bounded regions.

Everything lives in the canonical frame: S1 is centred at the origin, S2 at
``(D, 0)`` with ``D = r1 + d + r2`` and ``r1 >= r2``.  Regions are closed
sets whose boundary is a list of loops made of circular arcs and straight
segments; perimeters come from arc lengths and areas from Green's formula,
so no quadrature is involved anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import bisect

from .errors import MalformedBoundary, NegativeGap, NonPositiveRadius

TWO_PI = 2.0 * math.pi
INF = math.inf

Point = Tuple[float, float]


@dataclass(frozen=True)
class TwoBallConfig:
    """The datum S = S1 u S2 with radii ``r1 >= r2`` and boundary gap ``d``."""

    r1: float
    r2: float
    d: float

    @property
    def D(self) -> float:
        return self.r1 + self.d + self.r2

    @property
    def center1(self) -> Point:
        return (0.0, 0.0)

    @property
    def center2(self) -> Point:
        return (self.D, 0.0)

    @property
    def area1(self) -> float:
        return math.pi * self.r1**2

    @property
    def area2(self) -> float:
        return math.pi * self.r2**2

    @property
    def area(self) -> float:
        return self.area1 + self.area2

    @property
    def perimeter1(self) -> float:
        return TWO_PI * self.r1

    @property
    def perimeter2(self) -> float:
        return TWO_PI * self.r2

    @property
    def perimeter(self) -> float:
        return self.perimeter1 + self.perimeter2

    def radius(self, which: int) -> float:
        if which == 1:
            return self.r1
        if which == 2:
            return self.r2
        raise ValueError(f"ball index must be 1 or 2, got {which!r}")

    def in_S(self, x, y):
        """Closed membership in S1 u S2 (vectorised)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (x * x + y * y <= self.r1**2) | ((x - self.D) ** 2 + y * y <= self.r2**2)


def canonicalize(r1: float, r2: float, d: float) -> TwoBallConfig:
    """Validate the datum and put the larger ball first."""
    for name, v in (("r1", r1), ("r2", r2), ("d", d)):
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")
    if r1 <= 0 or r2 <= 0:
        raise NonPositiveRadius(f"radii must be positive, got r1={r1}, r2={r2}")
    if d < 0:
        raise NegativeGap(f"gap must be non-negative, got d={d}")
    if r1 < r2:
        r1, r2 = r2, r1
    return TwoBallConfig(float(r1), float(r2), float(d))


def ball_measures(cfg: TwoBallConfig, which: int) -> Tuple[float, float]:
    r = cfg.radius(which)
    return TWO_PI * r, math.pi * r * r


# ---------------------------------------------------------------------------
# Boundary primitives


@dataclass(frozen=True)
class Arc:
    """Circular arc traversed from ``theta_start`` to ``theta_end``.

    ``orientation`` is ``"ccw"`` when the angle increases along the arc.  With
    regions kept on the left of their boundary, ccw arcs are convex pieces
    (curvature ``+1/radius``) and cw arcs are concave ones.
    """

    center: Point
    radius: float
    theta_start: float
    theta_end: float
    orientation: str

    def __post_init__(self):
        if not self.radius > 0:
            raise MalformedBoundary(f"arc radius must be positive, got {self.radius}")
        if self.orientation not in ("ccw", "cw"):
            raise MalformedBoundary(f"bad orientation {self.orientation!r}")
        sweep = self.theta_end - self.theta_start
        if (self.orientation == "ccw") != (sweep > 0) or not 0 < abs(sweep) <= TWO_PI + 1e-12:
            raise MalformedBoundary(f"arc sweep {sweep} inconsistent with {self.orientation}")

    @property
    def sweep(self) -> float:
        return self.theta_end - self.theta_start

    @property
    def span(self) -> float:
        return abs(self.sweep)

    @property
    def curvature(self) -> float:
        return (1.0 if self.orientation == "ccw" else -1.0) / self.radius

    @property
    def length(self) -> float:
        return self.radius * self.span

    def point_at(self, theta: float) -> Point:
        cx, cy = self.center
        return (cx + self.radius * math.cos(theta), cy + self.radius * math.sin(theta))

    @property
    def start(self) -> Point:
        return self.point_at(self.theta_start)

    @property
    def end(self) -> Point:
        return self.point_at(self.theta_end)

    @property
    def midpoint(self) -> Point:
        return self.point_at(0.5 * (self.theta_start + self.theta_end))

    def tangent_at_start(self) -> Point:
        s = 1.0 if self.orientation == "ccw" else -1.0
        return (-s * math.sin(self.theta_start), s * math.cos(self.theta_start))

    def tangent_at_end(self) -> Point:
        s = 1.0 if self.orientation == "ccw" else -1.0
        return (-s * math.sin(self.theta_end), s * math.cos(self.theta_end))


@dataclass(frozen=True)
class Segment:
    """Straight piece, used for the infinite-radius (hull) case."""

    start: Point
    end: Point

    @property
    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])

    @property
    def midpoint(self) -> Point:
        return (0.5 * (self.start[0] + self.end[0]), 0.5 * (self.start[1] + self.end[1]))

    @property
    def curvature(self) -> float:
        return 0.0

    def tangent_at_start(self) -> Point:
        L = self.length
        return ((self.end[0] - self.start[0]) / L, (self.end[1] - self.start[1]) / L)

    tangent_at_end = tangent_at_start


Piece = Union[Arc, Segment]


def arc_between(center: Point, radius: float, a: Point, b: Point, orientation: str) -> Arc:
    """Arc around ``center`` from point ``a`` to point ``b`` (full circle if a == b)."""
    ta = math.atan2(a[1] - center[1], a[0] - center[0])
    tb = math.atan2(b[1] - center[1], b[0] - center[0])
    if orientation == "ccw":
        sweep = (tb - ta) % TWO_PI
        if sweep <= 1e-15:
            sweep = TWO_PI
    else:
        sweep = -((ta - tb) % TWO_PI)
        if sweep >= -1e-15:
            sweep = -TWO_PI
    return Arc(center, radius, ta, ta + sweep, orientation)


def full_circle(center: Point, radius: float) -> Arc:
    return Arc(center, radius, -math.pi, math.pi, "ccw")


def piece_green(p: Piece) -> float:
    """Contribution of one piece to the signed area (1/2) * loop integral of x dy - y dx."""
    if isinstance(p, Segment):
        (ax, ay), (bx, by) = p.start, p.end
        return 0.5 * (ax * by - ay * bx)
    cx, cy = p.center
    r, t0, t1 = p.radius, p.theta_start, p.theta_end
    return 0.5 * (r * cx * (math.sin(t1) - math.sin(t0)) - r * cy * (math.cos(t1) - math.cos(t0)) + r * r * (t1 - t0))


def loop_area(loop: Sequence[Piece]) -> float:
    return sum(piece_green(p) for p in loop)


def check_loops(loops: Sequence[Sequence[Piece]], tol: float = 1e-9) -> None:
    """Raise MalformedBoundary unless each loop is closed and C^1 at every joint."""
    for loop in loops:
        if not loop:
            raise MalformedBoundary("empty loop")
        for k, p in enumerate(loop):
            q = loop[(k + 1) % len(loop)]
            if math.dist(p.end, q.start) > tol:
                raise MalformedBoundary(f"gap of {math.dist(p.end, q.start):.3g} between pieces {k} and {k + 1}")
            ta, tb = p.tangent_at_end(), q.tangent_at_start()
            if abs(ta[0] * tb[1] - ta[1] * tb[0]) > 1e-6 or ta[0] * tb[0] + ta[1] * tb[1] < 0:
                raise MalformedBoundary(f"tangent jump between pieces {k} and {k + 1}")


# ---------------------------------------------------------------------------
# Regions


class Kind(str, Enum):
    EMPTY = "Empty"
    BALL1 = "Ball1"
    BALL2 = "Ball2"
    UNION = "UnionBalls"
    CLOSING = "Closing"
    TRANSVERSAL = "Transversal"


@dataclass(frozen=True)
class Region:
    """A closed candidate set with exact measures relative to S."""

    kind: Kind
    loops: Tuple[Tuple[Piece, ...], ...]
    perimeter: float
    area_in_S: float
    area_out_S: float
    r: Optional[float] = None
    r_in: Optional[float] = None
    r_out: Optional[float] = None

    @property
    def area(self) -> float:
        return self.area_in_S + self.area_out_S

    @property
    def pieces(self):
        return [p for loop in self.loops for p in loop]

    def __str__(self):
        if self.kind is Kind.CLOSING:
            return f"Closing(r={self.r:.6g})"
        if self.kind is Kind.TRANSVERSAL:
            return f"Transversal(r_in={self.r_in:.6g}, r_out={self.r_out:.6g})"
        return self.kind.value


def make_region(kind: Kind, loops, area_in_S: float, **radii) -> Region:
    loops = tuple(tuple(loop) for loop in loops)
    check_loops(loops)
    perimeter = sum(p.length for loop in loops for p in loop)
    area = sum(loop_area(loop) for loop in loops)
    area_in = min(area_in_S, area)
    return Region(kind, loops, perimeter, area_in, max(area - area_in, 0.0), **radii)


EMPTY = Region(Kind.EMPTY, (), 0.0, 0.0, 0.0)


def empty_region() -> Region:
    return EMPTY


def ball_region(cfg: TwoBallConfig, which: int) -> Region:
    r = cfg.radius(which)
    c = cfg.center1 if which == 1 else cfg.center2
    kind = Kind.BALL1 if which == 1 else Kind.BALL2
    return Region(kind, ((full_circle(c, r),),), TWO_PI * r, math.pi * r * r, 0.0)


def union_region(cfg: TwoBallConfig) -> Region:
    loops = ((full_circle(cfg.center1, cfg.r1),), (full_circle(cfg.center2, cfg.r2),))
    return Region(Kind.UNION, loops, cfg.perimeter, cfg.area, 0.0)


def _hull_angle(cfg: TwoBallConfig) -> float:
    # polar angle (about either centre) of the upper external tangent points
    return math.acos((cfg.r1 - cfg.r2) / cfg.D)


def hull_perimeter(cfg: TwoBallConfig) -> float:
    """Perimeter of co(S): two tangent segments plus the two exposed arcs."""
    phi = _hull_angle(cfg)
    seg = math.sqrt(cfg.D**2 - (cfg.r1 - cfg.r2) ** 2)
    return 2.0 * seg + cfg.r1 * (TWO_PI - 2.0 * phi) + cfg.r2 * 2.0 * phi


def hull_region(cfg: TwoBallConfig) -> Region:
    phi = _hull_angle(cfg)
    c, s = math.cos(phi), math.sin(phi)
    D, r1, r2 = cfg.D, cfg.r1, cfg.r2
    t1, t1b = (r1 * c, r1 * s), (r1 * c, -r1 * s)
    t2, t2b = (D + r2 * c, r2 * s), (D + r2 * c, -r2 * s)
    loop = (
        Segment(t2, t1),
        Arc(cfg.center1, r1, phi, TWO_PI - phi, "ccw"),
        Segment(t1b, t2b),
        Arc(cfg.center2, r2, -phi, phi, "ccw"),
    )
    return make_region(Kind.CLOSING, (loop,), cfg.area, r=INF)


def neck_center(cfg: TwoBallConfig, r):
    """Centre of the upper r-circle tangent to both balls (vectorised in r).

    Returns ``(xq, yq)``; ``yq`` is NaN where no such circle exists (2r < d).
    The triangle (c1, c2, q) has sides r1+r, r2+r, D; its height comes from
    Heron's formula, whose factor a+b-D = 2r-d is exact even for tiny gaps.
    """
    r = np.asarray(r, dtype=float)
    D, r1, r2 = cfg.D, cfg.r1, cfg.r2
    xq = ((r1 - r2) * (r1 + r2 + 2.0 * r) + D * D) / (2.0 * D)
    ok = 2.0 * r >= cfg.d
    root = np.sqrt(r1 + r2 + 2.0 * r + D) * np.sqrt((D - (r1 - r2)) * (D + (r1 - r2)))
    yq = np.where(ok, root * np.sqrt(np.maximum(2.0 * r - cfg.d, 0.0)) / (2.0 * D), np.nan)
    return xq, yq


def neck_height(cfg: TwoBallConfig, r: float) -> float:
    """Lowest ordinate reached by the upper neck arc of radius r."""
    if 2.0 * r < cfg.d:
        return -r
    xq, yq = neck_center(cfg, r)
    xq, yq = float(xq), float(yq)
    if 0.0 <= xq <= cfg.D:
        return yq - r
    # the arc's lowest point is then one of its endpoints
    return min(yq * cfg.r1 / (cfg.r1 + r), yq * cfg.r2 / (cfg.r2 + r))


def connectivity_radius(cfg: TwoBallConfig) -> float:
    """Smallest r for which Close_r(S) is connected (0 for touching balls)."""
    if cfg.d == 0.0:
        return 0.0
    lo = 0.5 * cfg.d
    hi = max(cfg.d, cfg.r2)
    while neck_height(cfg, hi) < 0.0:
        hi *= 2.0
    return bisect(lambda r: neck_height(cfg, r), lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=2000)


def _w_minus_sin(w):
    w = np.asarray(w, dtype=float)
    w2 = w * w
    series = w * w2 / 6.0 * (1.0 - w2 / 20.0 * (1.0 - w2 / 42.0 * (1.0 - w2 / 72.0)))
    return np.where(np.abs(w) < 1e-2, series, w - np.sin(w))


def closing_measures(cfg: TwoBallConfig, r, rc: Optional[float] = None):
    """(perimeter, area outside S) of Close_r(S) without building the loops.

    Vectorised in ``r`` (all entries must be >= R_c or infinite).  Caps are
    evaluated through w - sin w with a series for small w, which keeps the
    area accurate both for very large r and for hairline gaps.
    """
    r = np.asarray(r, dtype=float)
    D, r1, r2 = cfg.D, cfg.r1, cfg.r2
    # beyond 1e100 the closing equals the hull to far below rounding, and
    # squaring the neck height would overflow
    fin = np.isfinite(r) & (r < 1e100)
    rr = np.where(fin, r, 1.0)
    xq, yq = neck_center(cfg, rr)
    yq = np.nan_to_num(yq)
    th1 = np.arctan2(yq, xq)
    th2 = np.arctan2(yq, xq - D)
    ph2 = np.arctan2(yq, D - xq)  # pi - th2 without the rounding of pi
    # angle at the neck centre between the directions to c1 and c2
    om = np.arctan2(D * yq, xq * (xq - D) + yq * yq)
    per = r1 * (TWO_PI - 2.0 * th1) + r2 * (TWO_PI - 2.0 * ph2) + 2.0 * rr * om
    # upper half of the neck: polygon through the inner axis points of the
    # balls and the tangency points, minus the three circular caps that bulge
    # into it; all terms stay of the size of the result, so small gaps are fine
    u1, v1 = -2.0 * r1 * np.sin(0.5 * th1) ** 2, r1 * np.sin(th1)
    u2, v2 = cfg.d + 2.0 * r2 * np.sin(0.5 * ph2) ** 2, r2 * np.sin(ph2)
    poly = 0.5 * (u2 * v1 - u1 * v2 + cfg.d * v2)
    caps = 0.5 * (r1 * r1 * _w_minus_sin(th1) + r2 * r2 * _w_minus_sin(ph2) + rr * rr * _w_minus_sin(om))
    neck = 2.0 * (poly - caps)
    if not np.all(fin):
        hull = hull_region(cfg)
        per = np.where(fin, per, hull.perimeter)
        neck = np.where(fin, neck, hull.area_out_S)
    neck = np.maximum(neck, 0.0)
    if per.ndim == 0:
        return float(per), float(neck)
    return per, neck


HUGE_RADIUS = 1e6


def closing_region(cfg: TwoBallConfig, r: float, rc: Optional[float] = None) -> Region:
    """Close_r(S); ``r = inf`` gives the convex hull."""
    if not r > 0:
        raise NonPositiveRadius(f"closing radius must be positive, got {r}")
    if math.isinf(r):
        return hull_region(cfg)
    if rc is None:
        rc = connectivity_radius(cfg)
    if r < rc:
        return union_region(cfg)
    if r > HUGE_RADIUS * (cfg.D + cfg.r1):
        # arcs of such radius cannot be placed to double precision; the set
        # agrees with the hull up to O(1/r), so reuse its loops and keep the
        # closed-form measures
        per, out = closing_measures(cfg, r)
        return Region(Kind.CLOSING, hull_region(cfg).loops, per, cfg.area, out, r=float(r))
    xq, yq = (float(v) for v in neck_center(cfg, r))
    D, r1, r2 = cfg.D, cfg.r1, cfg.r2
    q, qb = (xq, yq), (xq, -yq)
    t1 = (xq * r1 / (r1 + r), yq * r1 / (r1 + r))
    t2 = (D + (xq - D) * r2 / (r2 + r), yq * r2 / (r2 + r))
    t1b, t2b = (t1[0], -t1[1]), (t2[0], -t2[1])
    th1 = math.atan2(t1[1], t1[0])
    th2 = math.atan2(t2[1], t2[0] - D)
    loop = (
        arc_between(q, r, t2, t1, "cw"),
        Arc(cfg.center1, r1, th1, TWO_PI - th1, "ccw"),
        arc_between(qb, r, t1b, t2b, "cw"),
        Arc(cfg.center2, r2, -th2, th2, "ccw"),
    )
    return make_region(Kind.CLOSING, (loop,), cfg.area, r=float(r))


# ---------------------------------------------------------------------------
# Membership


def _segment_distance(ax, ay, bx, by, x, y):
    dx, dy = bx - ax, by - ay
    L2 = dx * dx + dy * dy
    t = np.clip(((x - ax) * dx + (y - ay) * dy) / L2, 0.0, 1.0) if L2 > 0 else 0.0
    return np.hypot(x - (ax + t * dx), y - (ay + t * dy))


def _arc_distance(p: Arc, x, y):
    cx, cy = p.center
    ang = np.arctan2(y - cy, x - cx)
    lo = min(p.theta_start, p.theta_end)
    within = ((ang - lo) % TWO_PI) <= p.span + 1e-15
    radial = np.abs(np.hypot(x - cx, y - cy) - p.radius)
    (ax, ay), (bx, by) = p.start, p.end
    ends = np.minimum(np.hypot(x - ax, y - ay), np.hypot(x - bx, y - by))
    return np.where(within, radial, ends)


def boundary_distance(reg: Region, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.full(np.broadcast(x, y).shape, np.inf)
    for p in reg.pieces:
        if isinstance(p, Segment):
            dist = _segment_distance(*p.start, *p.end, x, y)
        else:
            dist = _arc_distance(p, x, y)
        out = np.minimum(out, dist)
    return out


def _winding(reg: Region, x, y):
    total = np.zeros(np.broadcast(x, y).shape)
    for p in reg.pieces:
        if isinstance(p, Arc) and p.span >= TWO_PI - 1e-12:
            inside = np.hypot(x - p.center[0], y - p.center[1]) < p.radius
            total += np.where(inside, TWO_PI if p.sweep > 0 else -TWO_PI, 0.0)
            continue
        (ax, ay), (bx, by) = p.start, p.end
        ux, uy, vx, vy = ax - x, ay - y, bx - x, by - y
        cr = ux * vy - uy * vx
        dt = ux * vx + uy * vy
        delta = np.arctan2(cr, dt)
        if isinstance(p, Arc):
            mx, my = p.midpoint
            side_m = (ax - mx) * (by - my) - (ay - my) * (bx - mx)
            in_disk = np.hypot(x - p.center[0], y - p.center[1]) < p.radius
            sigma = 1.0 if p.sweep > 0 else -1.0
            on_chord = (cr == 0.0) & (dt < 0.0)
            arc_side = (np.sign(cr) == np.sign(side_m)) & ~on_chord
            delta = delta + np.where(in_disk & arc_side, sigma * TWO_PI, 0.0)
            # a point exactly on the chord sees the arc sweep half a turn
            rot = np.sign(ux * (my - y) - uy * (mx - x))
            delta = np.where(on_chord, math.pi * rot, delta)
        total += delta
    return total / TWO_PI


def contains(reg: Region, x, y, tol: float = 1e-12):
    """Closed membership of points (vectorised)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if reg.kind is Kind.EMPTY:
        return np.zeros(np.broadcast(x, y).shape, dtype=bool)
    inside = np.abs(_winding(reg, x, y)) > 0.5
    return inside | (boundary_distance(reg, x, y) <= tol)


def point_in_region(reg: Region, pt: Sequence[float]) -> bool:
    if reg.kind is not Kind.EMPTY and not reg.loops:
        raise MalformedBoundary("non-empty region without boundary")
    return bool(contains(reg, pt[0], pt[1]))


# ---------------------------------------------------------------------------
# Closing membership for per-point radii (used by field rasterisation)


def _in_polygon(xs, ys, px, py):
    """Even-odd test of points against polygons given per point (vertex arrays)."""
    inside = np.zeros(np.broadcast(px, py).shape, dtype=bool)
    n = len(xs)
    for k in range(n):
        x0, y0 = xs[k], ys[k]
        x1, y1 = xs[(k + 1) % n], ys[(k + 1) % n]
        cond = (y0 > py) != (y1 > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x0 + (py - y0) * (x1 - x0) / (y1 - y0)
        inside ^= cond & (px < xint)
    return inside


def in_hull(cfg: TwoBallConfig, x, y):
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    phi = _hull_angle(cfg)
    c, s = math.cos(phi), math.sin(phi)
    D, r1, r2 = cfg.D, cfg.r1, cfg.r2
    # trapezoid between the axis and the upper tangent line n.x = r1
    below = c * x + s * y <= r1 + 1e-12
    band = (x >= r1 * c - 1e-12) & (x <= D + r2 * c + 1e-12)
    return cfg.in_S(x, y) | (below & band)


def in_closing(cfg: TwoBallConfig, x, y, r, rc: float):
    """Membership of points in Close_r(S) with a radius per point.

    ``r`` broadcasts against the points; entries below ``rc`` give S and
    infinite entries give co(S).
    """
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    r = np.broadcast_to(np.asarray(r, dtype=float), np.broadcast(x, y).shape)
    out = cfg.in_S(x, y)
    finite = np.isfinite(r) & (r >= rc) & (r > 0)
    hull = np.isinf(r)
    if np.any(hull):
        out = out | (hull & in_hull(cfg, x, y))
    if np.any(finite):
        rr = np.where(finite, r, 1.0)
        xq, yq = neck_center(cfg, rr)
        yq = np.nan_to_num(yq)
        D, r1, r2 = cfg.D, cfg.r1, cfg.r2
        t1x, t1y = xq * r1 / (r1 + rr), yq * r1 / (r1 + rr)
        t2x, t2y = D + (xq - D) * r2 / (r2 + rr), yq * r2 / (r2 + rr)
        zero = np.zeros_like(xq)
        quad = _in_polygon([zero, t1x, t2x, zero + D], [zero, t1y, t2y, zero], x, y)
        on_axis = (y == 0.0) & (x >= 0.0) & (x <= D)
        outside_disk = np.hypot(x - xq, y - yq) >= rr * (1.0 - 1e-14)
        out = out | (finite & (quad | on_axis) & outside_disk)
    return out
