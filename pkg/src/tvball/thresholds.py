"""Critical radii, lambda breakpoints, the dual norm and the interaction test."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np
from scipy.optimize import bisect

from .energy import EnergyParams
from .errors import CaseNotApplicable, NotInteracting, RootNotBracketed
from .geometry import Kind, TwoBallConfig, closing_measures, connectivity_radius, hull_perimeter

RATIO_LT = "ratio_lt"
RATIO_GE = "ratio_ge"
FIXED_POINT_SCAN = 1000


@dataclass(frozen=True)
class Thresholds:
    R_c: float
    R1: Optional[float]
    R2: Optional[float]
    lambda1: Optional[float]
    lambda2: Optional[float]
    lambda3: float
    dual_norm: float
    interacting: bool
    case_flag: str
    hull_perimeter: float
    # set when the lambda2 fixed-point residual changes sign more than once
    lambda2_multiple_roots: bool = False

    def as_dict(self):
        return asdict(self)


def interaction_test(cfg: TwoBallConfig) -> bool:
    """True iff P(S) > P(co(S)), i.e. the balls are close enough to interact."""
    return cfg.perimeter > hull_perimeter(cfg)


def closing_lhs(cfg: TwoBallConfig, r):
    """r -> P(Close_r(S)) + |Close_r(S) minus S| / r (hull perimeter at infinity)."""
    per, out = closing_measures(cfg, r)
    r = np.asarray(r, dtype=float)
    # out / r, with 0 at infinity and where nothing is added (r -> 0 gives S)
    ratio = np.divide(out, r, out=np.zeros(np.broadcast(out, r).shape), where=np.isfinite(r) & (np.asarray(out) > 0))
    val = per + ratio
    return float(val) if np.ndim(val) == 0 else val


def case_flag(cfg: TwoBallConfig) -> str:
    return RATIO_LT if cfg.r1 / 2.0 < cfg.area / hull_perimeter(cfg) else RATIO_GE


def _solve_closing_equation(cfg: TwoBallConfig, target: float, rc: float) -> float:
    f = lambda r: closing_lhs(cfg, r) - target  # noqa: E731
    lo = rc if rc > 0 else 1e-300
    if f(lo) <= 0.0:
        # the balls touch (root 0), or the gap is so small that the root is
        # not separable from R_c in double precision
        return 0.0 if rc == 0.0 else rc
    hi = max(2.0 * lo, cfg.r2)
    for _ in range(200):
        if f(hi) < 0.0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise RootNotBracketed(f"no sign change of the closing equation up to r={hi}")
    return bisect(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=2000)


def solve_R1(cfg: TwoBallConfig, rc: Optional[float] = None) -> float:
    """Root in [R_c, inf) of P(Close_r) + |Close_r minus S|/r = P(S); 0 for touching balls."""
    if not interaction_test(cfg):
        raise NotInteracting("P(S) <= P(co(S)): the closing equation has no root")
    if cfg.d == 0.0:
        return 0.0
    if rc is None:
        rc = connectivity_radius(cfg)
    return _solve_closing_equation(cfg, cfg.perimeter, rc)


def solve_R2(cfg: TwoBallConfig, rc: Optional[float] = None) -> float:
    """Root of the closing equation with right side P(S1)|S|/|S1| (ratio_lt only)."""
    if not interaction_test(cfg):
        raise NotInteracting("P(S) <= P(co(S))")
    if case_flag(cfg) != RATIO_LT:
        raise CaseNotApplicable("R2 is only defined when |S1|/P(S1) < |S|/P(co(S))")
    if rc is None:
        rc = connectivity_radius(cfg)
    target = cfg.perimeter1 * cfg.area / cfg.area1
    if cfg.d == 0.0 and cfg.r1 == cfg.r2:
        return 0.0
    return _solve_closing_equation(cfg, target, rc)


def dual_norm(cfg: TwoBallConfig) -> float:
    """max(|S1|/P(S1), |S|/P(co(S)))."""
    return max(cfg.r1 / 2.0, cfg.area / hull_perimeter(cfg))


def gamma0_residual(cfg: TwoBallConfig, lam: float):
    """g(lambda) = lambda (P(G) - P(S1)) - |G n S2| with G = Gamma_{0,lambda}(S).

    Returns ``(g, kind)``.  Once G has shrunk to S1 the residual is 0.
    """
    from .transversal import gamma_region

    G = gamma_region(cfg, EnergyParams(0.0, lam))
    if G.kind in (Kind.BALL1, Kind.EMPTY):
        return 0.0, G.kind
    return lam * (G.perimeter - cfg.perimeter1) - (G.area_in_S - cfg.area1), G.kind


def solve_lambda2_fixed_point(cfg: TwoBallConfig, n_scan: int = FIXED_POINT_SCAN):
    """Smallest lambda in (|S2|/P(S2), |S1|/P(S1)] where the fixed-point residual reaches 0.

    The residual is negative while Gamma_{0,lambda} is still larger than S1
    and the perimeter saving does not pay for the lost area; the first
    lambda where it becomes non-negative, or where Gamma collapses onto S1,
    is returned.  The second value reports whether the scan saw the
    residual change sign more than once.
    """
    lo, hi = cfg.r2 / 2.0, cfg.r1 / 2.0
    grid = np.linspace(lo, hi, n_scan + 1)[1:]
    vals = []
    for lam in grid:
        g, kind = gamma0_residual(cfg, lam)
        vals.append((g, kind))
    signs = [(g >= 0.0) or kind is Kind.BALL1 for g, kind in vals]
    changes = sum(1 for a, b in zip(signs, signs[1:]) if a != b)
    k = next((i for i, sg in enumerate(signs) if sg), None)
    if k is None:
        raise RootNotBracketed("fixed-point residual stays negative", scan=list(zip(grid, [v[0] for v in vals])))
    if k == 0:
        a, b = lo, grid[0]
    else:
        a, b = grid[k - 1], grid[k]

    def hit(lam):
        g, kind = gamma0_residual(cfg, lam)
        return g >= 0.0 or kind is Kind.BALL1

    for _ in range(100):
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if hit(mid):
            b = mid
        else:
            a = mid
    return b, changes > 1


def breakpoints(cfg: TwoBallConfig) -> Thresholds:
    rc = connectivity_radius(cfg)
    P_co = hull_perimeter(cfg)
    dn = dual_norm(cfg)
    flag = case_flag(cfg)
    if not interaction_test(cfg):
        return Thresholds(rc, None, None, None, None, cfg.r1 / 2.0, dn, False, flag, P_co)
    R1 = solve_R1(cfg, rc)
    lam1 = R1 * cfg.area2 / (R1 * cfg.perimeter2 + cfg.area2)
    R2 = None
    multiple = False
    if flag == RATIO_LT:
        # equal radii: the R2 equation is the R1 equation, reuse the root so
        # lambda1 and lambda2 agree to the last bit
        R2 = R1 if cfg.r1 == cfg.r2 else solve_R2(cfg, rc)
        lam2 = R2 * cfg.area1 / (R2 * cfg.perimeter1 + cfg.area1)
    else:
        v = cfg.area2 / (P_co - cfg.perimeter1)
        if v <= cfg.r2:
            lam2 = v
        else:
            lam2, multiple = solve_lambda2_fixed_point(cfg)
            lam2 = float(lam2)
    lam3 = max(cfg.r1 / 2.0, cfg.area / P_co)
    # the breakpoints are ordered in exact arithmetic; only absorb rounding
    ulp = 8.0 * np.finfo(float).eps * lam3
    if lam2 < lam1 <= lam2 + ulp:
        lam2 = lam1
    if lam3 < lam2 <= lam3 + ulp:
        lam2 = lam3
    return Thresholds(rc, R1, R2, lam1, lam2, lam3, dn, True, flag, P_co, multiple)
