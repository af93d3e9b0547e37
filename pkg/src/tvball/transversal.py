"""Transversal candidates: sets that contain S1 and cut through S2.

The boundary of such a set is made of an arc of S1, two concave outer arcs of
radius ``r_out = lambda/s`` tangent to S1, and one convex inner arc of radius
``r_in = lambda/(1-s)`` running through S2 with its centre on the axis.

Instead of intersecting the two tangency curves in the plane we parametrise
by the polar angle ``psi`` (about the centre of S2) of the upper point where
the inner arc meets the circle of S2.  Everything else follows: the inner
centre, the common normal at the crossing point, the outer centre, and one
scalar residual expressing tangency of the outer circle with S1.  The angle
covers both halves of S2, which the (alpha, theta) description does not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from .energy import EnergyParams
from .errors import DomainError, InvalidLevel, NoConvergence
from .geometry import (
    TWO_PI,
    HUGE_RADIUS,
    Arc,
    Kind,
    Region,
    Segment,
    TwoBallConfig,
    arc_between,
    ball_region,
    closing_region,
    empty_region,
    make_region,
    piece_green,
)

SCAN_POINTS = 4096


@dataclass(frozen=True)
class TransversalGeometry:
    r_in: float
    r_out: float
    alpha: float  # half opening of the inner arc, seen from its centre
    theta: float  # polar angle of the tangency point on the circle of S1
    outer_center: Tuple[float, float]  # inf entries when r_out is infinite
    inner_center: Tuple[float, float]
    type_tag: str  # "increasing", "decreasing" or "unique"
    psi: float
    crossing: Tuple[float, float]
    tangency: Tuple[float, float]
    lens_area: float


def tangent_curves(cfg: TwoBallConfig, r_in: float, r_out: float, t: float):
    """Points of the two tangency curves at parameter ``t`` (canonical frame).

    ``gamma_l(t)`` are centres of r_out-circles externally tangent to S1.
    ``gamma_r(t)`` are centres of r_out-circles externally tangent, at polar
    angle ``t``, to an r_in-circle centred on the axis at offset
    ``c(t) = -(r_in cos t + r2 cos(arcsin(r_in sin t / r2)))`` from the
    centre of S2 and passing through the circle of S2.
    """
    if not 0.0 < t < 0.5 * math.pi:
        raise DomainError(f"parameter must lie in (0, pi/2), got {t}")
    if r_in <= 0 or r_out <= 0:
        raise DomainError("radii must be positive")
    arg = r_in * math.sin(t) / cfg.r2
    if arg > 1.0:
        raise DomainError(f"arcsin argument {arg} exceeds 1")
    gl = ((cfg.r1 + r_out) * math.cos(t), (cfg.r1 + r_out) * math.sin(t))
    c = -(r_in * math.cos(t) + cfg.r2 * math.cos(math.asin(arg)))
    R = r_in + r_out
    gr = (cfg.D + c + R * math.cos(t), R * math.sin(t))
    return gl, gr


def _psi_eval(cfg: TwoBallConfig, r_in: float, r_out: float, psi):
    """Residual and admissibility of the configuration at crossing angle psi."""
    psi = np.asarray(psi, dtype=float)
    r1, r2, D = cfg.r1, cfg.r2, cfg.D
    sn, cs = np.sin(psi), np.cos(psi)
    rad = r_in * r_in - (r2 * sn) ** 2
    ok = rad >= 0.0
    c = r2 * cs - np.sqrt(np.where(ok, rad, 0.0))
    px, py = D + r2 * cs, r2 * sn
    nx, ny = (r2 * cs - c) / r_in, r2 * sn / r_in
    ok &= c + r_in <= r2 * (1.0 + 1e-12)
    npd = nx * px + ny * py
    if math.isinf(r_out):
        G = npd - r1
        t1x, t1y = r1 * nx, r1 * ny
        ok &= t1y > 0.0
        qx = qy = None
    else:
        G = (px * px + py * py - r1 * r1) / (2.0 * r_out) + npd - r1
        qx, qy = px + r_out * nx, py + r_out * ny
        qn = np.hypot(qx, qy)
        t1x, t1y = r1 * qx / qn, r1 * qy / qn
        ok &= t1y > 0.0
        ap = np.arctan2(py - qy, px - qx)
        at = np.arctan2(t1y - qy, t1x - qx)
        sweep = np.mod(ap - at, TWO_PI)
        ok &= sweep < math.pi
        # an arc passing through its lowest point must stay above the axis
        through_bottom = np.mod(ap + 0.5 * math.pi, TWO_PI) <= sweep
        ok &= ~through_bottom | (qy - r_out >= 0.0)
    return dict(G=G, ok=ok, c=c, px=px, py=py, nx=nx, ny=ny, qx=qx, qy=qy, t1x=t1x, t1y=t1y)


def _lens(cfg: TwoBallConfig, r_in: float, c: float, psi: float) -> Tuple[float, float]:
    """Area of S2 inside the inner disk, and the inner half-opening angle."""
    D, r2 = cfg.D, cfg.r2
    beta = math.atan2(r2 * math.sin(psi), r2 * math.cos(psi) - c)
    inner = Arc((D + c, 0.0), r_in, -beta, beta, "ccw")
    outer = Arc((D, 0.0), r2, psi, TWO_PI - psi, "ccw")
    return piece_green(inner) + piece_green(outer), beta


def transversal_solutions(cfg: TwoBallConfig, r_in: float, r_out: float, n_scan: int = SCAN_POINTS) -> List[TransversalGeometry]:
    """All admissible tangency configurations, sorted by increasing lens area."""
    psi = np.linspace(0.0, math.pi, n_scan + 1)[1:-1]
    ev = _psi_eval(cfg, r_in, r_out, psi)
    G, ok = ev["G"], ev["ok"]
    both = ok[:-1] & ok[1:]
    exact = np.nonzero(both & (G[:-1] == 0.0))[0]
    change = np.nonzero(both & (G[:-1] * G[1:] < 0.0))[0]
    roots = [psi[k] for k in exact]
    for k in change:
        roots.append(bisect(lambda a: float(_psi_eval(cfg, r_in, r_out, a)["G"]), psi[k], psi[k + 1], xtol=1e-15, maxiter=200))
    out = []
    for a in roots:
        ev = _psi_eval(cfg, r_in, r_out, a)
        if not bool(ev["ok"]):
            continue
        c = float(ev["c"])
        lens, beta = _lens(cfg, r_in, c, a)
        q = (math.inf, math.inf) if ev["qx"] is None else (float(ev["qx"]), float(ev["qy"]))
        t1 = (float(ev["t1x"]), float(ev["t1y"]))
        out.append(
            TransversalGeometry(
                r_in=r_in,
                r_out=r_out,
                alpha=beta,
                theta=math.atan2(t1[1], t1[0]),
                outer_center=q,
                inner_center=(cfg.D + c, 0.0),
                type_tag="",
                psi=float(a),
                crossing=(float(ev["px"]), float(ev["py"])),
                tangency=t1,
                lens_area=lens,
            )
        )
    out.sort(key=lambda g: g.lens_area)
    tagged = []
    for k, g in enumerate(out):
        tag = "unique" if len(out) == 1 else ("decreasing" if k == len(out) - 1 else "increasing")
        tagged.append(TransversalGeometry(**{**g.__dict__, "type_tag": tag}))
    return tagged


def solve_transversal(cfg: TwoBallConfig, p: EnergyParams) -> Optional[TransversalGeometry]:
    """The decreasing-type transversal configuration at (s, lambda), if any."""
    if p.s == 1.0:
        raise InvalidLevel("transversal sets need s < 1")
    sols = transversal_solutions(cfg, p.r_in, p.r_out)
    return sols[-1] if sols else None


def transversal_region(cfg: TwoBallConfig, g: TransversalGeometry) -> Region:
    p = g.crossing
    pb = (p[0], -p[1])
    t1 = g.tangency
    t1b = (t1[0], -t1[1])
    if g.r_out > HUGE_RADIUS * (cfg.D + cfg.r1):
        # straight within rounding; an arc this flat cannot be placed accurately
        upper, lower = Segment(p, t1), Segment(t1b, pb)
    else:
        q = g.outer_center
        qb = (q[0], -q[1])
        upper = arc_between(q, g.r_out, p, t1, "cw")
        lower = arc_between(qb, g.r_out, t1b, pb, "cw")
    loop = (
        upper,
        Arc(cfg.center1, cfg.r1, g.theta, TWO_PI - g.theta, "ccw"),
        lower,
        Arc(g.inner_center, g.r_in, -g.alpha, g.alpha, "ccw"),
    )
    return make_region(Kind.TRANSVERSAL, (loop,), cfg.area1 + g.lens_area, r_in=g.r_in, r_out=g.r_out)


def gamma_region(cfg: TwoBallConfig, p: EnergyParams, rc: Optional[float] = None) -> Region:
    """Limit set of the alternating opening/closing construction, in closed form."""
    r_in, r_out = p.r_in, p.r_out
    if r_in <= cfg.r2:
        return closing_region(cfg, r_out, rc)
    if r_in > cfg.r1:
        return empty_region()
    g = solve_transversal(cfg, p)
    if g is None:
        return ball_region(cfg, 1)
    return transversal_region(cfg, g)


def gamma_iterative(cfg: TwoBallConfig, p: EnergyParams, h: float, max_iter: int = 50, box=None):
    """Raster version of the construction: Y <- Close_{r_out}(Open_{r_in}(Y) n S).

    Starts from Y = Close_{r_out}(S) and stops at the first repeated bitmap.
    Returns ``(bitmap, iterations)``.
    """
    from .raster import morph, raster_shape, Bitmap

    if box is None:
        pad = 4 * h
        box = (-cfg.r1 - pad, cfg.D + cfg.r2 + pad, -cfg.r1 - pad, cfg.r1 + pad)
    S = raster_shape(cfg, box, h)
    r_in, r_out = p.r_in, p.r_out
    Y = morph(S, "close", r_out)
    for k in range(1, max_iter + 1):
        if math.isinf(r_in):
            X = Y
        else:
            X = morph(Y, "open", r_in) if r_in >= h else Y
        Xs = Bitmap(X.origin, X.h, X.bits & S.bits)
        if not Xs.bits.any():
            return Xs, k
        Ynew = morph(Xs, "close", r_out)
        if np.array_equal(Ynew.bits, Y.bits):
            return Ynew, k
        Y = Ynew
    raise NoConvergence(f"raster construction did not settle in {max_iter} iterations")
