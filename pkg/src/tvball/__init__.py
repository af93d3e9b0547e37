"""Exact ROF solutions for the indicator of two disjoint balls.

The main entry points are :func:`tvball.geometry.canonicalize`,
:func:`tvball.thresholds.breakpoints`, :func:`tvball.solver.minimizer` and
:func:`tvball.solver.evaluate_u`; raster and numerical TV oracles live in
:mod:`tvball.raster` and :mod:`tvball.tv`.
"""

from .energy import EnergyParams, region_energy
from .geometry import Kind, Region, TwoBallConfig, canonicalize
from .solver import evaluate_u, level_schedule, minimizer, rasterize_u
from .thresholds import Thresholds, breakpoints

__version__ = "0.1.0"

__all__ = [
    "EnergyParams",
    "Kind",
    "Region",
    "Thresholds",
    "TwoBallConfig",
    "breakpoints",
    "canonicalize",
    "evaluate_u",
    "level_schedule",
    "minimizer",
    "rasterize_u",
    "region_energy",
]
