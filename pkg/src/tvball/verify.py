"""Analytic-versus-oracle checks used by ``tvball verify``."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Callable, List, Optional

import numpy as np

from .config import RunConfig
from .energy import ENERGY_TOL, EnergyParams, region_energy
from .field import field_distance
from .geometry import TwoBallConfig, closing_region, contains
from .raster import morph, raster_measures, raster_shape
from .solver import candidate_list, minimizer, noninteracting_u, rasterize_u
from .thresholds import RATIO_LT, Thresholds, breakpoints, closing_lhs


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""
    seconds: float = 0.0

    @property
    def margin(self) -> float:
        return self.tolerance - self.value

    def as_dict(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "tolerance": self.tolerance,
            "margin": self.margin,
            "detail": self.detail,
        }


def _check(name: str, value: float, tol: float, detail: str = "") -> Check:
    ok = bool(np.isfinite(value) and value <= tol)
    return Check(name, ok, float(value), float(tol), detail)


def check_R1(cfg: TwoBallConfig, T: Thresholds) -> Check:
    if cfg.d == 0.0:
        return _check("R1 residual", abs(T.R1), 1e-10, "touching balls: R1 must vanish")
    return _check("R1 residual", abs(closing_lhs(cfg, T.R1) - cfg.perimeter), 1e-10)


def check_R2(cfg: TwoBallConfig, T: Thresholds) -> Check:
    if T.R2 == 0.0:
        return _check("R2 residual", 0.0, 1e-10, "equal touching balls: R2 = 0")
    target = cfg.perimeter1 * cfg.area / cfg.area1
    return _check("R2 residual", abs(closing_lhs(cfg, T.R2) - target), 1e-10)


def check_ordering(T: Thresholds) -> Check:
    viol = max(0.0, T.lambda1 - T.lambda2, T.lambda2 - T.lambda3, -T.lambda1)
    return _check("threshold ordering", viol, 0.0, "lambda1 <= lambda2 <= lambda3")


def check_dual_norm(T: Thresholds) -> Check:
    return _check("dual norm equals lambda3", abs(T.dual_norm - T.lambda3), 1e-15)


def check_optimality(cfg: TwoBallConfig, T: Thresholds, n: int) -> Check:
    worst = 0.0
    where = ""
    for lam in np.linspace(T.lambda3 / n, 1.1 * T.lambda3, n):
        for s in np.linspace(0.0, 1.0, n):
            p = EnergyParams(float(s), float(lam))
            dec = minimizer(cfg, T, p)
            best = min(region_energy(r, p) for r in candidate_list(cfg, T, p))
            v = dec.energy - best
            if v > worst:
                worst, where = v, f"s={s:.6g}, lambda={lam:.6g}"
    return _check("candidate optimality", worst, ENERGY_TOL, where)


def check_nested(cfg: TwoBallConfig, T: Thresholds, lam: float, n_levels: int = 25, n_pts: int = 2000, seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    x = rng.uniform(-cfg.r1, cfg.D + cfg.r2, n_pts)
    y = rng.uniform(-cfg.r1, cfg.r1, n_pts)
    prev = None
    bad = 0
    for s in np.linspace(0.0, 1.0, n_levels):
        m = contains(minimizer(cfg, T, EnergyParams(float(s), lam)).region, x, y)
        if prev is not None:
            bad += int(np.count_nonzero(m & ~prev))
        prev = m
    return _check(f"nestedness in s (lambda={lam:.6g})", bad, 0, "points entering a higher level set")


def check_closing_raster(cfg: TwoBallConfig, T: Thresholds, h: float, radii: Optional[List[float]] = None) -> Check:
    if radii is None:
        lo = max(T.R_c, 2 * h)
        radii = list(np.linspace(lo, 5 * lo + 1.0, 4))
    box = (-cfg.r1 - 2 * h, cfg.D + cfg.r2 + 2 * h, -cfg.r1 - 2 * h, cfg.r1 + 2 * h)
    S = raster_shape(cfg, box, h)
    worst = 0.0
    for r in radii:
        reg = closing_region(cfg, r, T.R_c)
        per, area = raster_measures(morph(S, "close", r))
        worst = max(worst, abs(per / reg.perimeter - 1.0), abs(area / reg.area - 1.0))
    return _check("closing vs raster morphology", worst, 0.01, f"{len(radii)} radii at h={h:.6g}")


def check_noninteracting(cfg: TwoBallConfig, T: Thresholds, lams, h: float) -> Check:
    worst = 0.0
    for lam in lams:
        box = (-cfg.r1 - 0.1, cfg.D + cfg.r2 + 0.1, -cfg.r1 - 0.1, cfg.r1 + 0.1)
        u = rasterize_u(cfg, T, lam, box, h)
        X, Y = u.mesh()
        worst = max(worst, float(np.abs(u.values - noninteracting_u(cfg, lam, X, Y)).max()))
    return _check("non-interaction formula", worst, 0.0)


def check_tv(cfg: TwoBallConfig, T: Thresholds, lam: float, h: float, iters: int) -> Check:
    from .tv import SolverSettings, data_field, rof_solve, tv_box

    box = tv_box(cfg)
    f = data_field(cfg, box, h)
    res = rof_solve(f, lam, SolverSettings(max_iters=iters))
    exact = rasterize_u(cfg, T, lam, box, h)
    if not np.any(exact.values):
        linf = float(np.abs(res.u.values).max())
        return _check(f"TV oracle (lambda={lam:.6g})", linf, 5e-3, "sup norm, analytic field vanishes")
    rel, _ = field_distance(res.u, exact)
    return _check(f"TV oracle (lambda={lam:.6g})", rel, 0.05, f"relative L2, h={h:.6g}, {res.iterations} iterations")


def run_checks(rc: RunConfig, log: Optional[Callable[[str], None]] = None) -> List[Check]:
    cfg = rc.two_ball()
    T = breakpoints(cfg)
    if rc.corrupt_R1 and T.interacting:
        T = replace(T, R1=T.R1 * (1.0 + rc.corrupt_R1) if T.R1 else rc.corrupt_R1)
    jobs = []
    if T.interacting:
        jobs.append(lambda: check_R1(cfg, T))
        if T.case_flag == RATIO_LT:
            jobs.append(lambda: check_R2(cfg, T))
        jobs.append(lambda: check_ordering(T))
        jobs.append(lambda: check_dual_norm(T))
        jobs.append(lambda: check_optimality(cfg, T, rc.optimality_grid))
        for lam in rc.lambdas:
            jobs.append(lambda lam=lam: check_nested(cfg, T, lam))
        jobs.append(lambda: check_closing_raster(cfg, T, rc.raster_h))
    else:
        jobs.append(lambda: check_noninteracting(cfg, T, rc.lambdas, rc.h))
    if rc.tv:
        for lam in rc.tv_lambdas or rc.lambdas:
            jobs.append(lambda lam=lam: check_tv(cfg, T, lam, rc.tv_h, rc.tv_iters))
    out = []
    for job in jobs:
        t0 = time.perf_counter()
        c = job()
        c.seconds = time.perf_counter() - t0
        if log:
            log(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.value:.3g} (tol {c.tolerance:.3g})")
        out.append(c)
    return out
