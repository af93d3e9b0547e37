"""The per-level geometric functional and comparisons between candidates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

from .errors import EmptyCandidateList, EmptyRegion, InvalidLevel
from .geometry import Kind, Region, TwoBallConfig

ENERGY_TOL = 1e-9


@dataclass(frozen=True)
class EnergyParams:
    s: float
    lam: float

    def __post_init__(self):
        if not (0.0 <= self.s <= 1.0) or math.isnan(self.s):
            raise InvalidLevel(f"level s must lie in [0, 1], got {self.s}")
        if not self.lam > 0 or not math.isfinite(self.lam):
            raise InvalidLevel(f"lambda must be positive and finite, got {self.lam}")

    @property
    def r_in(self) -> float:
        return math.inf if self.s == 1.0 else self.lam / (1.0 - self.s)

    @property
    def r_out(self) -> float:
        return math.inf if self.s == 0.0 else self.lam / self.s


def energy_from_measures(perimeter: float, area_in: float, area_out: float, p: EnergyParams) -> float:
    return perimeter + (p.s / p.lam) * area_out - ((1.0 - p.s) / p.lam) * area_in


def region_energy(reg: Region, p: EnergyParams) -> float:
    """F_{s,lambda}(reg); exactly 0 for the empty set."""
    if reg.kind is Kind.EMPTY:
        return 0.0
    return energy_from_measures(reg.perimeter, reg.area_in_S, reg.area_out_S, p)


def rho(reg: Region) -> float:
    """|X n S| / P(X)."""
    if reg.kind is Kind.EMPTY or reg.perimeter <= 0:
        raise EmptyRegion("rho is undefined for a set of zero perimeter")
    return reg.area_in_S / reg.perimeter


def compare_base_sets(cfg: TwoBallConfig, p: EnergyParams) -> Kind:
    """Cheapest of {empty, S1, S2, S}.

    F is additive over the two balls and each ball's energy is
    ``P_i - k |S_i|`` with ``k = (1-s)/lambda``, so the winner only depends on
    where k falls relative to ``2/r1 <= 2/r2``.  Ties go to the larger set.
    The sign of ``P_i - k |S_i|`` is that of ``1 - k r_i / 2``, compared with
    a relative tolerance so the switch happens at the exact level.
    """
    k = (1.0 - p.s) / p.lam
    keep1 = 0.5 * k * cfg.r1 >= 1.0 - 1e-12
    keep2 = 0.5 * k * cfg.r2 >= 1.0 - 1e-12
    if keep2:
        return Kind.UNION if keep1 else Kind.BALL2
    return Kind.BALL1 if keep1 else Kind.EMPTY


def best_of(regions: Sequence[Region], p: EnergyParams, tol: float = ENERGY_TOL) -> Tuple[Region, float]:
    """Minimal-energy region; near-ties (within ``tol``) go to the largest area."""
    if not regions:
        raise EmptyCandidateList("no candidates given")
    scored = [(region_energy(r, p), r) for r in regions]
    emin = min(e for e, _ in scored)
    near = [(e, r) for e, r in scored if e <= emin + tol]
    e, r = max(near, key=lambda t: (t[1].area, -t[0]))
    return r, e
