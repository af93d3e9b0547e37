import math

import numpy as np
import pytest

from golden import HAIRLINE_OUT, HULL_FIG, HULL_SYM_TOUCH, RC_FIG, RC_SYM
from tvball.errors import MalformedBoundary, NegativeGap, NonPositiveRadius
from tvball.geometry import (
    EMPTY,
    Arc,
    Kind,
    Segment,
    ball_measures,
    ball_region,
    canonicalize,
    check_loops,
    closing_measures,
    closing_region,
    connectivity_radius,
    contains,
    full_circle,
    hull_perimeter,
    hull_region,
    in_closing,
    in_hull,
    loop_area,
    neck_height,
    point_in_region,
    union_region,
)


class TestCanonicalize:
    def test_figure_config(self):
        c = canonicalize(1.2, 1.0, 0.05)
        assert c.D == pytest.approx(2.25, abs=1e-15)
        assert c.center1 == (0.0, 0.0)
        assert c.center2 == (c.D, 0.0)

    def test_swap(self):
        assert canonicalize(1.0, 1.2, 0.05) == canonicalize(1.2, 1.0, 0.05)

    def test_touching(self):
        assert canonicalize(1, 1, 0).D == 2.0

    @pytest.mark.parametrize("args", [(0, 1, 0.1), (1, -1, 0.1)])
    def test_bad_radius(self, args):
        with pytest.raises(NonPositiveRadius):
            canonicalize(*args)

    @pytest.mark.parametrize("args", [(math.nan, 1, 0), (math.inf, 1, 0), (1, 1, math.inf)])
    def test_non_finite(self, args):
        with pytest.raises(ValueError):
            canonicalize(*args)

    def test_bad_gap(self):
        with pytest.raises(NegativeGap):
            canonicalize(1, 1, -0.01)


def test_ball_measures():
    c = canonicalize(1.2, 1.0, 0.3)
    assert ball_measures(c, 1) == pytest.approx((2.4 * math.pi, 1.44 * math.pi))
    assert ball_measures(c, 2) == pytest.approx((2 * math.pi, math.pi))


class TestHull:
    def test_touching_equal(self):
        assert hull_perimeter(canonicalize(1, 1, 0)) == pytest.approx(HULL_SYM_TOUCH, abs=1e-12)

    def test_figure_golden(self, fig):
        assert hull_perimeter(fig) == pytest.approx(HULL_FIG, abs=1e-12)

    def test_tiny_second_ball(self):
        c = canonicalize(1.0, 1e-6, 0.5)
        assert hull_perimeter(c) >= 2 * math.pi

    def test_hull_region_measures(self, fig):
        h = hull_region(fig)
        assert h.perimeter == pytest.approx(HULL_FIG, abs=1e-12)
        assert h.area_in_S == pytest.approx(fig.area)
        assert h.area_out_S > 0

    def test_membership_of_tangent_band(self, fig):
        # points just below the upper tangent line are in the hull
        assert in_hull(fig, fig.D / 2, 0.5)
        assert not in_hull(fig, fig.D / 2, 1.2)


class TestConnectivity:
    def test_touching(self):
        assert connectivity_radius(canonicalize(1, 1, 0)) == 0.0

    def test_symmetric_closed_form(self, sym):
        assert connectivity_radius(sym) == pytest.approx(RC_SYM, abs=1e-15)

    def test_figure_golden(self, fig):
        assert connectivity_radius(fig) == pytest.approx(RC_FIG, abs=1e-15)

    def test_neck_height_sign(self, fig):
        rc = connectivity_radius(fig)
        assert neck_height(fig, 0.9 * rc) < 0 < neck_height(fig, 1.1 * rc)


class TestClosing:
    def test_loops_match_closed_form(self, fig):
        for r in (RC_FIG * 1.01, 0.1, 0.7, 3.0, 40.0):
            reg = closing_region(fig, r)
            per, out = closing_measures(fig, r)
            assert reg.perimeter == pytest.approx(per, rel=1e-12)
            assert reg.area_out_S == pytest.approx(out, rel=1e-9, abs=1e-14)
            assert reg.kind is Kind.CLOSING

    def test_below_connectivity_is_S(self, fig):
        reg = closing_region(fig, 0.5 * RC_FIG)
        assert reg.perimeter == pytest.approx(fig.perimeter)
        assert reg.area_out_S == 0.0

    def test_infinite_radius_is_hull(self, fig):
        reg = closing_region(fig, math.inf)
        assert reg.perimeter == pytest.approx(HULL_FIG, abs=1e-12)

    def test_converges_to_hull(self, fig):
        per, out = closing_measures(fig, 1e7)
        h = hull_region(fig)
        assert per == pytest.approx(h.perimeter, rel=1e-6)
        assert out == pytest.approx(h.area_out_S, rel=1e-5)

    def test_monotone_in_r(self, fig):
        rs = np.geomspace(RC_FIG, 100, 200)
        per, out = closing_measures(fig, rs)
        assert np.all(np.diff(out) >= -1e-15)
        assert np.all(np.diff(per) <= 1e-12)

    def test_vectorised_matches_scalar(self, fig):
        rs = np.array([0.03, 0.2, 2.0, math.inf])
        per, out = closing_measures(fig, rs)
        for k, r in enumerate(rs):
            p, o = closing_measures(fig, r)
            assert per[k] == p and out[k] == o

    def test_gap_midpoint(self, sym):
        mid = (1.0 + sym.d / 2, 0.0)
        assert point_in_region(closing_region(sym, 1.01 * RC_SYM), mid)
        assert not point_in_region(closing_region(sym, 0.99 * RC_SYM), mid)

    def test_nonpositive_radius(self, fig):
        with pytest.raises(NonPositiveRadius):
            closing_region(fig, 0.0)

    def test_in_closing_agrees_with_loops(self, fig):
        rng = np.random.default_rng(3)
        x = rng.uniform(-1.3, fig.D + 1.1, 10_000)
        y = rng.uniform(-1.3, 1.3, 10_000)
        for r in (0.05, 0.4, 2.5):
            reg = closing_region(fig, r)
            a = contains(reg, x, y)
            b = in_closing(fig, x, y, r, RC_FIG)
            assert np.count_nonzero(a != b) == 0


class TestRegions:
    def test_point_in_ball(self, fig):
        assert point_in_region(ball_region(fig, 1), fig.center1)

    def test_empty(self):
        assert not point_in_region(EMPTY, (0.0, 0.0))

    def test_union(self, fig):
        u = union_region(fig)
        assert u.perimeter == pytest.approx(fig.perimeter)
        assert u.area == pytest.approx(fig.area)

    def test_loop_area_sign(self):
        assert loop_area([full_circle((0.0, 0.0), 2.0)]) == pytest.approx(4 * math.pi)

    def test_gap_in_loop_is_rejected(self):
        a = Arc((0.0, 0.0), 1.0, 0.0, math.pi, "ccw")
        s = Segment((-1.0, 0.0), (0.9, 0.0))
        with pytest.raises(MalformedBoundary):
            check_loops([(a, s)])


@pytest.mark.parametrize("r1,r2,d,r,out", HAIRLINE_OUT)
def test_closing_area_hairline_gap(r1, r2, d, r, out):
    # the neck is ~1e-23 here; a formula subtracting O(sqrt r) terms loses it
    _, got = closing_measures(canonicalize(r1, r2, d), r)
    assert got == pytest.approx(out, rel=1e-12)


def test_huge_radius_closing_is_hull(fig):
    reg = closing_region(fig, 1e15)
    assert reg.kind is Kind.CLOSING
    assert reg.perimeter == pytest.approx(HULL_FIG, rel=1e-12)
