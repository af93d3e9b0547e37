"""Numerical ROF oracle: accelerated primal-dual iterations on a pixel grid.

Discretisation: isotropic TV with forward differences.  By default the
outer pixel ring is held at zero (homogeneous Dirichlet frame), so on any
box containing the convex hull of the data support the discrete problem
mimics the whole-plane one; a free (Neumann) boundary is available too.  In pixel units the problem reads

    min_u  sum |grad u| + 1/(2 L) sum (u - f)^2,    L = lambda / h,

which is the continuous energy divided by h.  The scheme is the accelerated
primal-dual method for a strongly convex data term (step sizes shrink with
theta = 1/sqrt(1 + 2 gamma tau), gamma = 1/L), run coarse-to-fine with both
the primal and the dual iterate carried over between grid levels.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numba as nb
import numpy as np

from .errors import NoConvergence
from .field import Field
from .geometry import TwoBallConfig


@dataclass(frozen=True)
class SolverSettings:
    max_iters: int = 200_000
    tol: float = 1e-7  # relative primal change between checkpoints
    check_every: int = 50
    tau: float = 0.25  # initial primal step (pixel units); sigma = 1/(8 tau)
    gap_tol: Optional[float] = None  # optional stop on relative duality gap
    pyramid_min: int = 48  # coarsest grid keeps at least this many pixels per side
    level_iters: int = 400  # iterations on each coarse level
    strict: bool = False  # raise NoConvergence instead of flagging
    accelerate: bool = True  # shrink the primal step (strongly convex variant)
    boundary: str = "dirichlet"  # "dirichlet": outer pixel ring held at 0; "neumann": free

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.tau > 0:
            raise ValueError("initial step must be positive")
        if self.max_iters < 1 or self.check_every < 1:
            raise ValueError("iteration counts must be positive")
        if self.boundary not in ("dirichlet", "neumann"):
            raise ValueError(f"unknown boundary condition {self.boundary!r}")


@dataclass
class RofResult:
    u: Field
    px: np.ndarray
    py: np.ndarray
    converged: bool
    iterations: int
    rel_change: float
    gap: float
    energy: float
    history: List[float]  # primal energies of the accepted checkpoints


def set_threads(n: Optional[int] = None) -> int:
    """Cap numba worker threads (defaults to the TVBALL_THREADS variable)."""
    if n is None:
        env = os.environ.get("TVBALL_THREADS")
        if not env:
            return nb.get_num_threads()
        n = int(env)
    n = max(1, min(int(n), nb.config.NUMBA_NUM_THREADS))
    nb.set_num_threads(n)
    return n


@nb.njit(cache=True, parallel=True)
def _dual_step(ubar, px, py, sigma):
    ny, nx = ubar.shape
    for j in nb.prange(ny):
        for i in range(nx):
            gx = ubar[j, i + 1] - ubar[j, i] if i < nx - 1 else 0.0
            gy = ubar[j + 1, i] - ubar[j, i] if j < ny - 1 else 0.0
            ax = px[j, i] + sigma * gx
            ay = py[j, i] + sigma * gy
            n = math.sqrt(ax * ax + ay * ay)
            if n > 1.0:
                ax /= n
                ay /= n
            px[j, i] = ax
            py[j, i] = ay


@nb.njit(cache=True)
def _div(px, py, j, i, ny, nx):
    d = 0.0
    if i < nx - 1:
        d += px[j, i]
    if i > 0:
        d -= px[j, i - 1]
    if j < ny - 1:
        d += py[j, i]
    if j > 0:
        d -= py[j - 1, i]
    return d


@nb.njit(cache=True, parallel=True)
def _primal_step(u, ubar, px, py, f, tau, lam, theta, frame):
    ny, nx = u.shape
    a = tau / lam
    for j in nb.prange(ny):
        for i in range(nx):
            if frame and (j == 0 or i == 0 or j == ny - 1 or i == nx - 1):
                # frame pixels carry the homogeneous Dirichlet condition
                u[j, i] = 0.0
                ubar[j, i] = 0.0
                continue
            old = u[j, i]
            new = (old + tau * _div(px, py, j, i, ny, nx) + a * f[j, i]) / (1.0 + a)
            u[j, i] = new
            ubar[j, i] = new + theta * (new - old)


@nb.njit(cache=True)
def _energies(u, px, py, f, lam, frame):
    """(primal energy, dual energy) in pixel units."""
    ny, nx = u.shape
    tv = 0.0
    fid = 0.0
    dot = 0.0
    dd = 0.0
    for j in range(ny):
        for i in range(nx):
            gx = u[j, i + 1] - u[j, i] if i < nx - 1 else 0.0
            gy = u[j + 1, i] - u[j, i] if j < ny - 1 else 0.0
            tv += math.sqrt(gx * gx + gy * gy)
            fid += (u[j, i] - f[j, i]) ** 2
            if frame and (j == 0 or i == 0 or j == ny - 1 or i == nx - 1):
                continue
            d = _div(px, py, j, i, ny, nx)
            dot += f[j, i] * d
            dd += d * d
    return tv + fid / (2.0 * lam), -dot - 0.5 * lam * dd


def discrete_energy(u: np.ndarray, f: np.ndarray, lam_px: float) -> float:
    z = np.zeros_like(u)
    return float(_energies(np.ascontiguousarray(u, dtype=float), z, z, np.ascontiguousarray(f, dtype=float), lam_px, False)[0])


def _iterate(u, px, py, f, lam_px, tau, n_iter, settings, stop, monitor=None):
    """Run up to ``n_iter`` accelerated iterations in place.

    Returns (iterations done, converged, last relative change, best state).
    ``monitor(u, primal, dual)`` is called at every checkpoint; a true
    return value ends the run early (``converged`` stays False).
    """
    ubar = u.copy()
    frame = settings.boundary == "dirichlet"
    sigma = 1.0 / (8.0 * tau)
    gamma = 1.0 / lam_px
    ref = u.copy()
    done = 0
    rel = math.inf
    history = []
    best = None
    converged = False
    while done < n_iter:
        steps = min(settings.check_every, n_iter - done)
        for _ in range(steps):
            _dual_step(ubar, px, py, sigma)
            theta = 1.0 / math.sqrt(1.0 + 2.0 * gamma * tau) if settings.accelerate else 1.0
            _primal_step(u, ubar, px, py, f, tau, lam_px, theta, frame)
            tau *= theta
            sigma /= theta
        done += steps
        if not stop:
            continue
        nu = float(np.linalg.norm(u))
        rel = float(np.linalg.norm(u - ref)) / max(nu, 1e-300)
        ref[:] = u
        pe, de = _energies(u, px, py, f, lam_px, frame)
        if best is None or pe <= best[0]:
            best = (pe, de, u.copy(), px.copy(), py.copy())
            history.append(pe)
        gap_ok = settings.gap_tol is not None and (pe - de) <= settings.gap_tol * max(abs(pe), 1.0)
        if rel < settings.tol or gap_ok:
            converged = True
            break
        if monitor is not None and monitor(u, pe, de):
            break
    return done, converged, rel, best, history


def _coarsen(f: np.ndarray) -> np.ndarray:
    ny, nx = f.shape
    g = np.pad(f, ((0, ny % 2), (0, nx % 2)), mode="edge")
    return 0.25 * (g[0::2, 0::2] + g[1::2, 0::2] + g[0::2, 1::2] + g[1::2, 1::2])


def _refine(a: np.ndarray, shape) -> np.ndarray:
    r = np.repeat(np.repeat(a, 2, axis=0), 2, axis=1)
    return np.ascontiguousarray(r[: shape[0], : shape[1]])


def rof_solve(f: Field, lam: float, settings: SolverSettings = SolverSettings(), monitor=None, init=None) -> RofResult:
    """Approximate discrete ROF minimizer for data ``f`` and weight ``lam``.

    ``init`` = (u, px, py) on the fine grid skips the pyramid (warm start).
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    data = np.ascontiguousarray(f.values, dtype=float)
    if not np.all(np.isfinite(data)):
        raise ValueError("data field contains non-finite values")
    # build the pyramid of data
    levels = [data]
    while init is None and min(levels[-1].shape) >= 2 * settings.pyramid_min:
        levels.append(_coarsen(levels[-1]))
    if init is not None:
        u, px, py = (np.array(a, dtype=float, copy=True) for a in init)
        if u.shape != data.shape or px.shape != data.shape or py.shape != data.shape:
            raise ValueError("warm start arrays do not match the data grid")
    else:
        u = levels[-1].copy()
        px = np.zeros_like(u)
        py = np.zeros_like(u)
    for k in range(len(levels) - 1, 0, -1):
        lam_px = lam / (f.h * 2**k)
        _iterate(u, px, py, levels[k], lam_px, settings.tau, settings.level_iters, settings, stop=False)
        shape = levels[k - 1].shape
        u, px, py = _refine(u, shape), _refine(px, shape), _refine(py, shape)
    lam_px = lam / f.h
    fine = levels[0]
    done, converged, rel, best, history = _iterate(
        u, px, py, fine, lam_px, settings.tau, settings.max_iters, settings, stop=True, monitor=monitor
    )
    pe, de, ub, pxb, pyb = best
    if settings.strict and not converged:
        raise NoConvergence(f"relative change {rel:.3g} after {done} iterations")
    return RofResult(Field(f.origin, f.h, ub), pxb, pyb, converged, done, rel, pe - de, pe, history)


def tv_box(cfg: TwoBallConfig, margin: float = 1.0 / 16):
    """Box around co(S).

    The minimizer on the plane is supported in co(S), so with the zero frame
    any margin of a few pixels reproduces it exactly.
    """
    return (-cfg.r1 - margin, cfg.D + cfg.r2 + margin, -cfg.r1 - margin, cfg.r1 + margin)


def data_field(cfg: TwoBallConfig, box, h: float) -> Field:
    """chi_S sampled at pixel centres."""
    f = Field.zeros(box, h)
    X, Y = f.mesh()
    f.values[:] = cfg.in_S(X, Y).astype(float)
    return f


def euler_lagrange_residual(res: RofResult, f: Field, lam: float, boundary: str = "dirichlet") -> float:
    """RMS of u - L div p - f (pixel units); the pinned frame is skipped for Dirichlet."""
    px, py = res.px, res.py
    div = np.zeros_like(px)
    div[:, :-1] += px[:, :-1]
    div[:, 1:] -= px[:, :-1]
    div[:-1, :] += py[:-1, :]
    div[1:, :] -= py[:-1, :]
    r = res.u.values - (lam / f.h) * div - f.values
    if boundary == "dirichlet":
        r = r[1:-1, 1:-1]
    return float(np.sqrt(np.mean(r * r)))


@dataclass
class ExtinctionProbe:
    lam: float
    extinct: bool
    sup: float  # sup norm of the last iterate
    iterations: int
    reason: str  # "sup", "energy", "cheeger" or "budget"
    state: Optional[tuple] = field(default=None, repr=False)  # (u, px, py) for warm starts


def grid_tv(v: np.ndarray) -> float:
    """Discrete isotropic TV (forward differences) of an image."""
    v = np.asarray(v, dtype=float)
    gx = np.zeros_like(v)
    gy = np.zeros_like(v)
    gx[:, :-1] = v[:, 1:] - v[:, :-1]
    gy[:-1, :] = v[1:, :] - v[:-1, :]
    return float(np.sqrt(gx * gx + gy * gy).sum())


def _cheeger_certificate(u, f, lam_px, fractions=(0.0, 0.5)) -> bool:
    """True if some direction v >= 0 built from u has sum(f v) > L TV(v)."""
    top = float(u.max())
    for a in fractions:
        cands = [np.maximum(u - a * top, 0.0)]
        if a > 0:
            cands.append(np.clip(u, 0.0, (1.0 - a) * top))
        for v in cands:
            tv = grid_tv(v)
            if tv > 0 and float(np.sum(f * v)) > lam_px * tv * (1.0 + 1e-12):
                return True
    return False


def extinction_probe(f: Field, lam: float, threshold: float = 1e-3, settings: Optional[SolverSettings] = None,
                     init=None) -> ExtinctionProbe:
    """Decide whether the discrete ROF solution at ``lam`` vanishes.

    Early exits: the iterate falls below ``threshold`` in sup norm (declared
    extinct), or some super-level set C of the iterate has
    sum_C f > L * TV(chi_C).  The latter makes the derivative of the energy
    at u = 0 in the direction chi_C negative, so zero is provably not the
    minimizer ("cheeger").  When the budget runs out the sup norm of the
    final iterate decides.
    """
    settings = settings or SolverSettings(max_iters=12000, level_iters=3000, accelerate=False, tau=0.35)
    data = np.ascontiguousarray(f.values, dtype=float)
    lam_px = lam / f.h
    e0 = float(np.sum(data * data)) / (2.0 * lam_px)
    state = {"reason": "budget", "sup": math.inf, "calls": 0}

    def monitor(u, pe, de):
        state["calls"] += 1
        state["sup"] = float(np.abs(u).max())
        if state["sup"] < threshold:
            state["reason"] = "sup"
            return True
        if pe < e0 * (1.0 - 1e-12):
            state["reason"] = "energy"
            return True
        if state["calls"] % 2 == 1 and state["sup"] > 0 and _cheeger_certificate(u, data, lam_px):
            state["reason"] = "cheeger"
            return True
        return False

    res = rof_solve(f, lam, replace(settings, tol=1e-300), monitor=monitor, init=init)
    sup, reason = state["sup"], state["reason"]
    extinct = reason == "sup" or (reason == "budget" and sup < threshold)
    return ExtinctionProbe(lam, extinct, sup, res.iterations, reason, (res.u.values, res.px, res.py))


def extinction_lambda(f: Field, lo: float, hi: float, ratio: float = 1.04, threshold: float = 1e-3,
                      settings: Optional[SolverSettings] = None, warm: float = 0.05, log=None,
                      check_ends: bool = True):
    """Bisection on lam for the value where the discrete solution starts to vanish.

    ``lo`` must give a non-zero solution and ``hi`` a vanishing one; both are
    probed unless ``check_ends`` is False (for brackets known a priori, e.g.
    an inscribed disc below and the isoperimetric bound above).  Midpoints
    are geometric.  Stops once hi / lo <= ``ratio`` and returns
    (lo, hi, probes).
    Probes are warm-started from an earlier probe whose lam lies within a
    relative distance ``warm``; farther seeds slow the iteration down.
    """
    probes = []

    def run(lam):
        near = min(probes, key=lambda q: abs(q.lam - lam), default=None)
        init = near.state if near is not None and abs(near.lam - lam) <= warm * lam else None
        p = extinction_probe(f, lam, threshold, settings, init=init)
        probes.append(p)
        if log:
            log(p)
        return p.extinct

    if check_ends and run(lo):
        raise ValueError(f"solution already vanishes at lower end {lo}")
    if check_ends and not run(hi):
        raise ValueError(f"solution does not vanish at upper end {hi}")
    while hi > ratio * lo:
        mid = math.sqrt(lo * hi)
        if run(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi, probes
