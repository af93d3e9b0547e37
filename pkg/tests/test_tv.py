import math

import numpy as np
import pytest

from tvball.errors import NoConvergence
from tvball.field import Field
from tvball.geometry import canonicalize
from tvball.tv import (
    SolverSettings,
    data_field,
    discrete_energy,
    euler_lagrange_residual,
    extinction_probe,
    grid_tv,
    rof_solve,
    set_threads,
    tv_box,
)


def disk_field(h, r=1.0, pad=0.25):
    f = Field.zeros((-r - pad, r + pad, -r - pad, r + pad), h)
    X, Y = f.mesh()
    f.values[:] = (X * X + Y * Y <= r * r).astype(float)
    return f


def test_settings_validation():
    with pytest.raises(ValueError):
        SolverSettings(tau=0.0)
    with pytest.raises(ValueError):
        SolverSettings(max_iters=0)
    with pytest.raises(ValueError):
        SolverSettings(boundary="periodic")


def test_constant_field_neumann():
    f = Field.zeros((0, 1, 0, 1), 1 / 32)
    f.values[:] = 0.7
    res = rof_solve(f, 0.2, SolverSettings(max_iters=200, boundary="neumann"))
    assert np.allclose(res.u.values, 0.7, atol=1e-12)


def test_zero_data():
    f = Field.zeros((0, 1, 0, 1), 1 / 16)
    res = rof_solve(f, 0.3, SolverSettings(max_iters=100))
    assert not res.u.values.any()


def test_disk_plateau():
    """u = (1 - 2 lambda / r) on the unit disk, up to a boundary band."""
    h = 1 / 64
    f = disk_field(h)
    res = rof_solve(f, 0.25, SolverSettings(max_iters=1500))
    X, Y = res.u.mesh()
    inner = X * X + Y * Y <= 0.8**2
    outer = X * X + Y * Y >= 1.2**2
    assert np.median(res.u.values[inner]) == pytest.approx(0.5, abs=0.02)
    assert np.abs(res.u.values[outer]).max() < 0.02


def test_energy_decreases_and_gap_small():
    f = disk_field(1 / 32)
    res = rof_solve(f, 0.25, SolverSettings(max_iters=2000))
    assert res.history == sorted(res.history, reverse=True)
    assert res.gap >= -1e-9
    assert res.gap < 1e-2 * res.energy
    assert res.energy <= discrete_energy(f.values, f.values, 0.25 * 32)


def test_optimality_residual():
    f = disk_field(1 / 32)
    res = rof_solve(f, 0.25, SolverSettings(max_iters=3000))
    assert euler_lagrange_residual(res, f, 0.25) < 0.01


def test_strict_mode():
    f = disk_field(1 / 32)
    with pytest.raises(NoConvergence):
        rof_solve(f, 0.25, SolverSettings(max_iters=10, strict=True, tol=1e-14))


def test_rejects_bad_input():
    f = disk_field(1 / 16)
    with pytest.raises(ValueError):
        rof_solve(f, 0.0)
    g = Field(f.origin, f.h, f.values.copy())
    g.values[0, 0] = math.nan
    with pytest.raises(ValueError):
        rof_solve(g, 0.2)


def test_warm_start_shape_check():
    f = disk_field(1 / 16)
    z = np.zeros((3, 3))
    with pytest.raises(ValueError):
        rof_solve(f, 0.2, init=(z, z, z))


def test_grid_tv_of_square():
    v = np.zeros((20, 20))
    v[5:15, 5:15] = 1.0
    # 40 unit edges; the corner pixel has a diagonal jump counted once as sqrt(2)
    assert grid_tv(v) == pytest.approx(38 + math.sqrt(2))


def test_extinction_probe_far_from_threshold():
    c = canonicalize(1.0, 1.0, 0.0)
    f = data_field(c, tv_box(c), 1 / 32)
    assert extinction_probe(f, 0.9).extinct
    p = extinction_probe(f, 0.3)
    assert not p.extinct and p.reason in ("cheeger", "energy")


def test_threads():
    assert set_threads(1) == 1


def test_tv_box_contains_hull():
    c = canonicalize(1.2, 1.0, 0.05)
    xmin, xmax, ymin, ymax = tv_box(c)
    assert xmin < -c.r1 and xmax > c.D + c.r2 and ymin < -c.r1 and ymax > c.r1
