import math

import numpy as np
import pytest

from tvball.energy import ENERGY_TOL, EnergyParams, region_energy
from tvball.errors import BoxTooSmall, ConfigInteracting
from tvball.field import field_distance
from tvball.geometry import Kind, canonicalize, contains
from tvball.solver import (
    candidate_list,
    evaluate_u,
    level_schedule,
    minimizer,
    noninteracting_u,
    rasterize_u,
    regime_of,
    s_a,
    s_b,
    s_c,
)
from tvball.thresholds import breakpoints


def box_of(cfg, pad=0.1):
    return (-cfg.r1 - pad, cfg.D + cfg.r2 + pad, -cfg.r1 - pad, cfg.r1 + pad)


class TestRegimes:
    def test_table(self, fig_T):
        T = fig_T
        assert regime_of(T, 0.5 * T.lambda1) == "A"
        assert regime_of(T, 0.5 * (T.lambda1 + T.lambda2)) == "B"
        assert regime_of(T, 0.5 * (T.lambda2 + T.lambda3)) == "C1"
        assert regime_of(T, 1.1 * T.lambda3) == "D"

    def test_ratio_ge(self, small2):
        T = breakpoints(small2)
        assert regime_of(T, 0.5 * (T.lambda2 + T.lambda3)) == "C2"

    def test_far(self):
        assert regime_of(breakpoints(canonicalize(1, 1, 3)), 0.1) == "N"


class TestBreakpointLevels:
    def test_s_a_at_lambda1(self, fig, fig_T):
        lam = fig_T.lambda1
        assert s_a(fig, fig_T, lam) == pytest.approx(1 - 2 * lam / fig.r2, abs=1e-9)

    def test_s_a_small_lambda(self, fig, fig_T):
        assert s_a(fig, fig_T, 1e-6) < 1e-3

    def test_s_b_at_lambda2(self, fig, fig_T):
        lam = fig_T.lambda2
        assert s_b(fig, fig_T, lam) == pytest.approx(1 - 2 * lam / fig.r1, abs=1e-7)

    def test_s_b_continuity_at_lambda1(self, fig, fig_T):
        lam = fig_T.lambda1
        assert s_b(fig, fig_T, lam * (1 + 1e-6)) == pytest.approx(s_a(fig, fig_T, lam), abs=1e-4)

    def test_s_c_at_lambda3(self, fig, fig_T):
        assert s_c(fig, fig_T, fig_T.lambda3) == pytest.approx(0.0, abs=1e-9)

    def test_s_c_continuity_at_lambda2(self, fig, fig_T):
        lam = fig_T.lambda2
        assert s_c(fig, fig_T, lam * (1 + 1e-7)) == pytest.approx(s_b(fig, fig_T, lam), abs=1e-4)

    def test_schedule_reports_used(self, fig, fig_T):
        sch = level_schedule(fig, fig_T, 0.5 * fig_T.lambda1)
        assert set(sch.used()) == {"s_a"}


class TestMinimizer:
    def test_empty_after_lambda3(self, fig, fig_T):
        for s in np.linspace(0, 1, 11):
            assert minimizer(fig, fig_T, EnergyParams(float(s), 1.01 * fig_T.lambda3)).region.kind is Kind.EMPTY

    def test_regime_A_union(self, fig, fig_T):
        lam = 0.5 * fig_T.lambda1
        sa, s2 = s_a(fig, fig_T, lam), 1 - 2 * lam / fig.r2
        d = minimizer(fig, fig_T, EnergyParams(0.5 * (sa + s2), lam))
        assert d.region.kind is Kind.UNION and d.regime == "A"

    def test_regime_C2_ball(self, small2):
        T = breakpoints(small2)
        d = minimizer(small2, T, EnergyParams(0.0, 0.5 * (T.lambda2 + T.lambda3)))
        assert d.region.kind is Kind.BALL1

    def test_regime_B_has_gamma(self, small2):
        T = breakpoints(small2)
        lam = 0.31
        assert regime_of(T, lam) == "B"
        d = minimizer(small2, T, EnergyParams(0.05, lam))
        assert d.region.kind is Kind.TRANSVERSAL

    def test_energy_consistent(self, fig, fig_T):
        p = EnergyParams(0.2, 0.3)
        d = minimizer(fig, fig_T, p)
        assert d.energy == region_energy(d.region, p)

    @pytest.mark.parametrize("cfg_args", [(1.2, 1.0, 0.05), (1.0, 0.3, 0.0), (1.0, 1.0, 0.1)])
    def test_beats_candidates_coarse_grid(self, cfg_args):
        cfg = canonicalize(*cfg_args)
        T = breakpoints(cfg)
        for lam in np.linspace(T.lambda3 / 12, 1.1 * T.lambda3, 12):
            for s in np.linspace(0, 1, 12):
                p = EnergyParams(float(s), float(lam))
                e = minimizer(cfg, T, p).energy
                assert e <= min(region_energy(r, p) for r in candidate_list(cfg, T, p)) + ENERGY_TOL

    def test_nested_levels(self, fig, fig_T):
        rng = np.random.default_rng(7)
        x = rng.uniform(-1.2, fig.D + 1.0, 4000)
        y = rng.uniform(-1.2, 1.2, 4000)
        for lam in (0.5 * fig_T.lambda1, 0.1, 0.4):
            prev = None
            for s in np.linspace(0, 1, 30):
                m = contains(minimizer(fig, fig_T, EnergyParams(float(s), lam)).region, x, y)
                if prev is not None:
                    assert not np.any(m & ~prev)
                prev = m


class TestU:
    def test_far_point(self, fig, fig_T):
        assert evaluate_u(fig, fig_T, 0.1, (10.0, 10.0)) == 0.0

    def test_center_regime_A(self, fig, fig_T):
        lam = 0.5 * fig_T.lambda1
        assert evaluate_u(fig, fig_T, lam, fig.center1) == pytest.approx(1 - 2 * lam / fig.r1, abs=1e-10)

    def test_noninteracting_center(self):
        c = canonicalize(1.0, 0.5, 2.0)
        T = breakpoints(c)
        assert evaluate_u(c, T, 0.2, c.center1) == pytest.approx(0.6, abs=1e-10)
        assert evaluate_u(c, T, 0.2, c.center2) == pytest.approx(0.2, abs=1e-10)
        assert evaluate_u(c, T, 0.3, c.center2) == 0.0

    def test_noninteracting_formula(self):
        c = canonicalize(1.0, 1.0, 3.0)
        assert noninteracting_u(c, 0.25, c.center1) == pytest.approx(0.5)
        assert noninteracting_u(c, 0.5, c.center2) == 0.0
        assert noninteracting_u(c, 0.1, (c.D / 2, 0.0)) == 0.0
        with pytest.raises(ConfigInteracting):
            noninteracting_u(canonicalize(1, 1, 0), 0.1, (0.0, 0.0))

    def test_raster_vanishes_after_extinction(self, fig, fig_T):
        u = rasterize_u(fig, fig_T, 1.01 * fig_T.lambda3, box_of(fig), 1 / 32)
        assert not u.values.any()

    def test_raster_small_lambda_close_to_data(self, fig, fig_T):
        h = 1 / 64
        u = rasterize_u(fig, fig_T, 1e-3, box_of(fig), h)
        X, Y = u.mesh()
        chi = fig.in_S(X, Y).astype(float)
        assert np.abs(u.values - chi).sum() * h * h < 0.02

    def test_raster_matches_pointwise(self, fig, fig_T):
        h = 1 / 16
        lam = 0.5 * (fig_T.lambda1 + fig_T.lambda2)
        u = rasterize_u(fig, fig_T, lam, box_of(fig), h)
        X, Y = u.mesh()
        rng = np.random.default_rng(1)
        for k in rng.choice(u.values.size, 25, replace=False):
            j, i = np.unravel_index(k, u.values.shape)
            assert u.values[j, i] == pytest.approx(evaluate_u(fig, fig_T, lam, (X[j, i], Y[j, i])), abs=1e-3)

    def test_raster_bounds(self, fig, fig_T):
        u = rasterize_u(fig, fig_T, 0.3, box_of(fig), 1 / 32)
        assert u.values.min() >= 0.0 and u.values.max() <= 1.0

    def test_box_too_small(self, fig, fig_T):
        with pytest.raises(BoxTooSmall):
            rasterize_u(fig, fig_T, 0.3, (0, 1, 0, 1), 1 / 32)

    def test_noninteracting_raster(self):
        c = canonicalize(1.0, 1.0, 1.5)
        T = breakpoints(c)
        u = rasterize_u(c, T, 0.3, box_of(c), 1 / 32)
        X, Y = u.mesh()
        rel, linf = field_distance(u, type(u)(u.origin, u.h, noninteracting_u(c, 0.3, X, Y)))
        assert linf == 0.0
