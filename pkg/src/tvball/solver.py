"""Level-by-level minimizers C_{s,lambda} and the assembled ROF solution u_lambda.

For a given lambda the minimizers form a nested family in s, so everything
is organised around a per-lambda *schedule*: the regime and the levels at
which the minimizer changes type.  ``minimizer`` reads the schedule,
``evaluate_u`` bisects on membership, and ``rasterize_u`` fills a grid in
one vectorised pass using the same schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional

import numpy as np
from scipy.optimize import bisect

from .energy import ENERGY_TOL, EnergyParams, region_energy
from .errors import BoxTooSmall, ConfigInteracting, OutOfRegime, RootNotBracketed
from .field import Field
from .geometry import (
    Kind,
    Region,
    TwoBallConfig,
    ball_region,
    closing_measures,
    closing_region,
    contains,
    empty_region,
    in_closing,
    in_hull,
    union_region,
)
from .energy import compare_base_sets
from .thresholds import RATIO_LT, Thresholds
from .transversal import gamma_region

REGIME_TOL = 1e-12
LEVEL_TOL = 1e-12
SB_SCAN = 256
SC_SCAN = 2000
U_BISECT_STEPS = 40
TRANSVERSAL_LEVELS = 1024


@dataclass(frozen=True)
class Schedule:
    lam: float
    regime: str  # "A", "B", "C1", "C2", "D" or "N" (non-interacting)
    s1: float  # level where S1 stops paying for itself, 1 - 2 lambda / r1
    s2: float  # same for S2
    s_a: Optional[float] = None
    s_b: Optional[float] = None
    s_c: Optional[float] = None
    plateau: float = 0.0  # width of a zero-energy plateau next to s_c, if any

    def used(self) -> Dict[str, float]:
        return {k: getattr(self, k) for k in ("s_a", "s_b", "s_c") if getattr(self, k) is not None}


@dataclass(frozen=True)
class LevelDecision:
    s: float
    lam: float
    region: Region
    energy: float
    regime: str
    breakpoints_used: Dict[str, float] = field(default_factory=dict)


def regime_of(T: Thresholds, lam: float) -> str:
    if not T.interacting:
        return "N"
    if lam > T.lambda3 + REGIME_TOL:
        return "D"
    if T.lambda1 > 0 and lam <= T.lambda1 + REGIME_TOL:
        return "A"
    if lam <= T.lambda2 + REGIME_TOL:
        return "B"
    return "C1" if T.case_flag == RATIO_LT else "C2"


def closing_energy(cfg: TwoBallConfig, s, lam: float, rc: float):
    """F_{s,lambda}(Close_{lambda/s}(S)) for an array of levels (hull at s = 0)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    with np.errstate(divide="ignore"):
        r = np.where(s > 0, lam / np.where(s > 0, s, 1.0), np.inf)
    connected = r >= rc
    per = np.full(s.shape, cfg.perimeter)
    out = np.zeros(s.shape)
    if np.any(connected):
        p, o = closing_measures(cfg, r[connected])
        per[connected] = p
        out[connected] = o
    return per + (s / lam) * out - ((1.0 - s) / lam) * cfg.area


def s_a(cfg: TwoBallConfig, T: Thresholds, lam: float) -> float:
    if not T.interacting or not T.R1 or lam > T.lambda1 + REGIME_TOL or lam <= 0:
        raise OutOfRegime(f"s_a needs 0 < lambda <= lambda1 = {T.lambda1} and d > 0")
    return lam / T.R1


def _gamma_gap(cfg, lam, rc, s):
    p = EnergyParams(s, lam)
    G = gamma_region(cfg, p, rc)
    return region_energy(G, p) - region_energy(ball_region(cfg, 1), p)


def s_b(cfg: TwoBallConfig, T: Thresholds, lam: float) -> float:
    """Smallest s with F(Gamma_{s,lambda}) = F(S1) below min(lambda/R1, 1 - 2 lambda/r1)."""
    if not T.interacting or not (T.lambda1 < lam <= T.lambda2 + REGIME_TOL):
        raise OutOfRegime(f"s_b needs lambda1 < lambda <= lambda2, got {lam}")
    s1 = max(0.0, 1.0 - 2.0 * lam / cfg.r1)
    s_hi = min(lam / T.R1, s1) if T.R1 > 0 else s1
    grid = np.linspace(0.0, s_hi, SB_SCAN + 1)
    vals = np.array([_gamma_gap(cfg, lam, T.R_c, s) for s in grid])
    tol = ENERGY_TOL * max(1.0, cfg.perimeter)
    hit = np.nonzero(vals >= -tol)[0]
    if len(hit) == 0:
        raise RootNotBracketed(f"F(Gamma) - F(S1) stays negative on [0, {s_hi}]", scan=list(zip(grid, vals)))
    k = hit[0]
    if k == 0 or abs(vals[k]) <= tol:
        return float(grid[k])
    f = lambda s: _gamma_gap(cfg, lam, T.R_c, s)  # noqa: E731
    a, b = grid[k - 1], grid[k]
    if f(b) >= 0.0 and f(a) < 0.0:
        return float(bisect(f, a, b, xtol=1e-15, maxiter=200))
    return float(b)


def s_c_detail(cfg: TwoBallConfig, T: Thresholds, lam: float):
    """(s_c, plateau width): maximal zero of s -> F(Close_{lambda/s}(S))."""
    if not T.interacting or T.case_flag != RATIO_LT or not (T.lambda2 < lam <= T.lambda3 + REGIME_TOL):
        raise OutOfRegime(f"s_c needs ratio_lt and lambda2 < lambda <= lambda3, got {lam}")
    grid = np.linspace(0.0, 1.0, SC_SCAN + 1)
    vals = closing_energy(cfg, grid, lam, T.R_c)
    tol = ENERGY_TOL * max(1.0, cfg.perimeter)
    nonpos = np.nonzero(vals <= tol)[0]
    if len(nonpos) == 0:
        return 0.0, 0.0
    k = nonpos[-1]
    flat = np.abs(vals) <= tol
    j = k
    while j > 0 and flat[j - 1] and flat[j]:
        j -= 1
    plateau = float(grid[k] - grid[j]) if flat[k] else 0.0
    if k == len(grid) - 1:
        return 1.0, plateau
    f = lambda s: float(closing_energy(cfg, s, lam, T.R_c)[0])  # noqa: E731
    a, b = grid[k], grid[k + 1]
    if f(a) > 0.0:
        return float(a), plateau
    return float(bisect(f, a, b, xtol=1e-16, maxiter=200)), plateau


def s_c(cfg: TwoBallConfig, T: Thresholds, lam: float) -> float:
    return s_c_detail(cfg, T, lam)[0]


@lru_cache(maxsize=4096)
def level_schedule(cfg: TwoBallConfig, T: Thresholds, lam: float) -> Schedule:
    regime = regime_of(T, lam)
    s1 = max(0.0, 1.0 - 2.0 * lam / cfg.r1)
    s2 = max(0.0, 1.0 - 2.0 * lam / cfg.r2)
    if regime == "A":
        return Schedule(lam, regime, s1, s2, s_a=s_a(cfg, T, lam))
    if regime == "B":
        return Schedule(lam, regime, s1, s2, s_b=s_b(cfg, T, lam))
    if regime == "C1":
        sc, plateau = s_c_detail(cfg, T, lam)
        return Schedule(lam, regime, s1, s2, s_c=sc, plateau=plateau)
    return Schedule(lam, regime, s1, s2)


def _closing(cfg, T, s, lam):
    return closing_region(cfg, math.inf if s == 0.0 else lam / s, T.R_c)


def minimizer(cfg: TwoBallConfig, T: Thresholds, p: EnergyParams) -> LevelDecision:
    """The largest minimizer C_{s,lambda} as dictated by the regime table."""
    s, lam = p.s, p.lam
    sch = level_schedule(cfg, T, lam)
    reg = sch.regime
    le = lambda a, b: b is not None and a <= b + LEVEL_TOL  # noqa: E731
    if reg == "N":
        kind = compare_base_sets(cfg, p)
        region = {
            Kind.EMPTY: empty_region,
            Kind.BALL1: lambda: ball_region(cfg, 1),
            Kind.BALL2: lambda: ball_region(cfg, 2),
            Kind.UNION: lambda: union_region(cfg),
        }[kind]()
    elif reg == "A":
        if le(s, sch.s_a):
            region = _closing(cfg, T, s, lam)
        elif le(s, sch.s2):
            region = union_region(cfg)
        elif le(s, sch.s1):
            region = ball_region(cfg, 1)
        else:
            region = empty_region()
    elif reg == "B":
        if le(s, sch.s_b):
            region = gamma_region(cfg, p, T.R_c)
        elif le(s, sch.s1):
            region = ball_region(cfg, 1)
        else:
            region = empty_region()
    elif reg == "C1":
        region = _closing(cfg, T, s, lam) if le(s, sch.s_c) else empty_region()
    elif reg == "C2":
        region = ball_region(cfg, 1) if le(s, sch.s1) else empty_region()
    else:
        region = empty_region()
    return LevelDecision(s, lam, region, region_energy(region, p), reg, sch.used())


def candidate_list(cfg: TwoBallConfig, T: Thresholds, p: EnergyParams):
    """Every competitor named by the classification of minimizers."""
    from .transversal import solve_transversal, transversal_region

    cands = [empty_region(), ball_region(cfg, 1), ball_region(cfg, 2), union_region(cfg)]
    cands.append(_closing(cfg, T, p.s, p.lam))
    if p.s < 1.0:
        cands.append(gamma_region(cfg, p, T.R_c))
        g = solve_transversal(cfg, p)
        if g is not None:
            cands.append(transversal_region(cfg, g))
    return cands


# ---------------------------------------------------------------------------
# Assembling u


def noninteracting_u(cfg: TwoBallConfig, lam: float, x, y=None):
    """(1 - 2 lambda/r1)^+ on S1 plus (1 - 2 lambda/r2)^+ on S2."""
    from .thresholds import interaction_test

    if interaction_test(cfg):
        raise ConfigInteracting("balls interact: P(S) > P(co(S))")
    if y is None:
        x, y = x[0], x[1]
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = max(0.0, 1.0 - 2.0 * lam / cfg.r1)
    b = max(0.0, 1.0 - 2.0 * lam / cfg.r2)
    u = np.where(x * x + y * y <= cfg.r1**2, a, 0.0) + np.where((x - cfg.D) ** 2 + y * y <= cfg.r2**2, b, 0.0)
    return float(u) if u.ndim == 0 else u


def evaluate_u(cfg: TwoBallConfig, T: Thresholds, lam: float, x) -> float:
    """sup{s : x in C_{s,lambda}} by bisection on the nested family.

    Without interaction the closed form is returned as is.
    """
    px, py = float(x[0]), float(x[1])
    if not T.interacting:
        return float(noninteracting_u(cfg, lam, px, py))

    def inside(s):
        reg = minimizer(cfg, T, EnergyParams(s, lam)).region
        return bool(contains(reg, px, py))

    if not inside(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    if inside(hi):
        return 1.0
    for _ in range(U_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if inside(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _closing_level(cfg, rc, lam, cap, x, y, steps=52):
    """min(cap, lambda * t*) where t* = sup{t : x in Close_{1/t}(S)}, per point.

    Points outside co(S) get 0.  Bisection is on s = lambda t in [0, cap].
    """
    out = np.zeros(x.shape)
    if cap <= 0.0 or x.size == 0:
        return out
    hull = in_hull(cfg, x, y)
    if not hull.any():
        return out
    xs, ys = x[hull], y[hull]
    top = in_closing(cfg, xs, ys, lam / cap, rc)
    res = np.where(top, cap, 0.0)
    todo = ~top
    lo = np.zeros(todo.sum())
    hi = np.full(todo.sum(), cap)
    xt, yt = xs[todo], ys[todo]
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        with np.errstate(divide="ignore"):
            r = np.where(mid > 0, lam / np.where(mid > 0, mid, 1.0), np.inf)
        m = in_closing(cfg, xt, yt, r, rc)
        lo = np.where(m, mid, lo)
        hi = np.where(m, hi, mid)
    res[todo] = lo
    out[hull] = res
    return out


def _transversal_levels(cfg, T, lam, s_lo, s_hi, x, y, n_levels=TRANSVERSAL_LEVELS):
    """Largest tabulated level s in (s_lo, s_hi] with the point inside Gamma_s (else 0)."""
    levels = np.linspace(s_lo, s_hi, n_levels + 1)[1:]
    cache = {}

    def region(k):
        if k not in cache:
            cache[k] = gamma_region(cfg, EnergyParams(float(levels[k]), lam), T.R_c)
        return cache[k]

    # binary search over the (nested) table, pixels grouped by current index
    lo = np.full(x.shape, -1)
    hi = np.full(x.shape, n_levels)
    while True:
        active = hi - lo > 1
        if not active.any():
            break
        mid = (lo + hi) // 2
        idx = np.nonzero(active)[0]
        for k in np.unique(mid[idx]):
            sel = idx[mid[idx] == k]
            m = contains(region(int(k)), x[sel], y[sel])
            lo[sel] = np.where(m, k, lo[sel])
            hi[sel] = np.where(m, hi[sel], k)
    return np.where(lo >= 0, levels[np.maximum(lo, 0)], 0.0)


def rasterize_u(cfg: TwoBallConfig, T: Thresholds, lam: float, box, h: float) -> Field:
    """u_lambda sampled at pixel centres of the grid covering ``box``."""
    xmin, xmax, ymin, ymax = box
    if xmin > -cfg.r1 or xmax < cfg.D + cfg.r2 or ymin > -cfg.r1 or ymax < cfg.r1:
        raise BoxTooSmall(f"box {box} does not contain co(S)")
    f = Field.zeros(box, h)
    X, Y = f.mesh()
    if not T.interacting:
        f.values[:] = noninteracting_u(cfg, lam, X, Y)
        return f
    sch = level_schedule(cfg, T, lam)
    in1 = X * X + Y * Y <= cfg.r1**2
    in2 = ((X - cfg.D) ** 2 + Y * Y <= cfg.r2**2) & ~in1
    rest = ~(in1 | in2)
    u = np.zeros(X.shape)
    if sch.regime == "A":
        u[in1] = sch.s1
        u[in2] = sch.s2
        u[rest] = _closing_level(cfg, T.R_c, lam, sch.s_a, X[rest], Y[rest])
    elif sch.regime == "C1":
        u[in1 | in2] = sch.s_c
        u[rest] = _closing_level(cfg, T.R_c, lam, sch.s_c, X[rest], Y[rest])
    elif sch.regime == "C2":
        u[in1] = sch.s1
    elif sch.regime == "B":
        u[in1] = sch.s1
        # Gamma_s is the closing while lambda/(1-s) <= r2, a transversal set above
        s_r2 = 1.0 - lam / cfg.r2
        cap = min(sch.s_b, max(s_r2, 0.0))
        if s_r2 >= 0.0:
            u[in2] = cap
            u[rest] = _closing_level(cfg, T.R_c, lam, cap, X[rest], Y[rest])
        if sch.s_b > cap:
            sel = (in2 | rest) & in_hull(cfg, X, Y)
            band = _transversal_levels(cfg, T, lam, cap, sch.s_b, X[sel], Y[sel])
            u[sel] = np.maximum(u[sel], band)
    f.values[:] = u
    return f
