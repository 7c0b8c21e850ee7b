import math

import numpy as np
import pytest

from liepoisson import bracket as br
from liepoisson import dynamics as dy
from liepoisson import fields as fc
from liepoisson import group as gg
from liepoisson import observables as ob
from liepoisson.fields import Grid

GRID = Grid(32)


@pytest.mark.parametrize("kw", [dict(dt=0.0, t_end=1.0), dict(dt=0.1, t_end=-1.0),
                                dict(dt=0.1, t_end=1.0, scheme="euler"),
                                dict(dt=0.1, t_end=1.0, reproject_every=0),
                                dict(dt=0.1, t_end=1.0, band=0)])
def test_integrator_spec_validation(kw):
    with pytest.raises(ValueError):
        dy.IntegratorSpec(**kw)


@pytest.mark.parametrize("dt,t_end,expected", [(0.1, 0.3, 3), (0.1, 0.25, 3), (0.5, 0.0, 0)])
def test_steps_cover_interval(dt, t_end, expected):
    steps = dy.IntegratorSpec(dt=dt, t_end=t_end).steps()
    assert len(steps) == expected
    assert sum(steps) == pytest.approx(t_end)


def test_zero_time_is_identity():
    u = fc.random_divfree(1, GRID)
    st, _ = dy.evolve_eulerian(u, dy.IntegratorSpec(dt=0.1, t_end=0.0))
    assert st.u is u


def test_taylor_green_steady_and_pressure():
    tg = fc.taylor_green(GRID)
    st, _ = dy.evolve_eulerian(tg, dy.IntegratorSpec(dt=0.01, t_end=0.5))
    assert (st.u - tg).norm() < 1e-12 * tg.norm()
    X, Y = GRID.coords()
    np.testing.assert_allclose(dy.pressure(tg).values, 0.25 * (np.cos(2 * X) + np.cos(2 * Y)),
                               atol=1e-13)


def test_pressure_gradient_balances_advection():
    u = fc.random_divfree(3, GRID, 3)
    lhs = fc.grad(dy.pressure(u)) + ob.advect(u, u)
    # what remains is the divergence-free part, i.e. -du/dt
    np.testing.assert_allclose(lhs.data, -dy.eulerian_rhs(u).data, atol=1e-11)


def test_invariants_conserved():
    mean = fc.DivFreeField._trusted(GRID, np.stack([np.full((32, 32), 0.4), np.zeros((32, 32))]))
    u = fc.random_divfree(4, GRID, 3) + mean
    _, s = dy.evolve_eulerian(u, dy.IntegratorSpec(dt=2e-3, t_end=0.2))
    assert s.relative_drift("energy") < 1e-10
    assert s.relative_drift("enstrophy") < 1e-10
    assert np.ptp(s.column("momentum_x")) == 0.0
    assert s.column("momentum_x")[0] == pytest.approx(0.4 * 4 * math.pi**2)


def test_series_csv(tmp_path):
    _, s = dy.evolve_eulerian(fc.taylor_green(GRID), dy.IntegratorSpec(dt=0.1, t_end=0.2))
    s.to_csv(tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "t,energy,enstrophy,momentum_x,momentum_y,vol_drift,commutation_residual"
    assert len(lines) == 4
    assert lines[1].endswith(",,")


def test_blow_up_reports_provenance():
    u = fc.random_divfree(5, GRID) * 1e6
    with pytest.raises(dy.IntegrationError) as exc:
        with np.errstate(all="ignore"):
            dy.evolve_eulerian(u, dy.IntegratorSpec(dt=10.0, t_end=1000.0), record=False)
    assert exc.value.module == "dynamics.evolve_eulerian"
    assert exc.value.step >= 1


def test_cfl_warning_recorded():
    _, s = dy.evolve_eulerian(fc.taylor_green(GRID), dy.IntegratorSpec(dt=0.5, t_end=0.5))
    assert s.warnings and "stability bound" in s.warnings[0]


@pytest.fixture(scope="module")
def tangent_setup():
    u0 = fc.random_divfree(6, GRID, 3)
    spec = dy.IntegratorSpec(dt=0.02, t_end=0.2)
    return u0, spec


def test_tangent_matches_finite_difference(tangent_setup):
    u0, spec = tangent_setup
    w = fc.random_divfree(7, GRID, 3)
    tl = dy.linearized_eulerian(u0, w, spec)
    eps = 1e-5
    up = dy.evolve_eulerian(u0 + eps * w, spec, record=False)[0].u
    um = dy.evolve_eulerian(u0 - eps * w, spec, record=False)[0].u
    fd = (up - um) / (2 * eps)
    assert (fd - tl).norm() < 1e-7 * tl.norm()


def test_adjoint_dot_product(tangent_setup):
    u0, spec = tangent_setup
    a = fc.random_divfree(8, GRID, 4)
    b = fc.random_divfree(9, GRID, 4)
    _, g = dy.adjoint_gradient(u0, spec, lambda ut: a)
    lhs = fc.inner(a, dy.linearized_eulerian(u0, b, spec))
    assert fc.inner(g, b) == pytest.approx(lhs, rel=1e-12)


def test_basis_and_adjoint_differentials_agree_on_truncated_system():
    u0 = fc.random_divfree(10, GRID, 3)
    spec = dy.IntegratorSpec(dt=0.05, t_end=0.1, band=3)
    f = ob.linear(fc.random_divfree(11, GRID, 3))
    a = dy.evolved_differential(f, u0, spec, 3, "basis")
    b = dy.evolved_differential(f, u0, spec, method="adjoint")
    assert (a - b).norm() < 1e-12 * a.norm()


def test_poisson_residual_trivial_cases():
    u0 = fc.random_divfree(12, GRID, 3)
    f = ob.linear(fc.random_divfree(13, GRID, 3))
    g = ob.linear(fc.random_divfree(14, GRID, 3))
    assert dy.poisson_map_residual(f, f, u0, dy.IntegratorSpec(dt=0.05, t_end=0.1)) == 0.0
    assert dy.poisson_map_residual(f, g, u0, dy.IntegratorSpec(dt=0.05, t_end=0.0)) == 0.0


def test_full_grid_flow_is_poisson_to_rounding():
    grid = Grid(64)
    u0 = fc.random_divfree(15, grid, 3, 0.5)
    f = ob.linear(fc.random_divfree(16, grid, 3))
    g = ob.linear(fc.random_divfree(17, grid, 3))
    r = dy.poisson_map_check(f, g, u0, dy.IntegratorSpec(dt=0.01, t_end=0.1), method="adjoint")
    assert r.normalized < 1e-10
    assert r.lhs == pytest.approx(r.rhs, rel=1e-9)


def test_spray_at_identity_is_pressure_gradient():
    tg = fc.taylor_green(GRID)
    p = gg.TangentPoint.at_identity(tg)
    deta, dv = dy.spray_rhs(p)
    np.testing.assert_allclose(deta.data, tg.data)
    X, Y = GRID.coords()
    np.testing.assert_allclose(dv.data, 0.5 * np.stack([np.sin(2 * X), np.sin(2 * Y)]), atol=1e-12)


def test_lagrangian_and_eulerian_commute_on_short_run():
    u0 = fc.random_divfree(18, GRID, 3, 0.3)
    s = dy.commutation_residual(u0, dy.IntegratorSpec(dt=0.05, t_end=0.2))
    r = s.column("commutation_residual")
    assert r[0] == 0.0
    assert np.max(r) < 1e-6
    assert np.max(s.column("vol_drift")) < 1e-6


def test_reprojection_option_runs():
    u0 = fc.taylor_green(GRID)
    st, s = dy.evolve_lagrangian(gg.TangentPoint.at_identity(u0),
                                 dy.IntegratorSpec(dt=0.05, t_end=0.2, reproject_every=2))
    assert (st.p.u - u0).norm() < 1e-6 * u0.norm()
