import pytest
from hypothesis import given, settings, strategies as st

from liepoisson import bracket as br
from liepoisson import dynamics as dy
from liepoisson import fields as fc
from liepoisson import observables as ob
from liepoisson.checks import library_observable
from liepoisson.fields import Grid

GRID = Grid(32)


def _draw(seed):
    v = fc.random_divfree(seed, GRID)
    f, g, h = (library_observable(seed + i, GRID, GRID.kmax) for i in (1, 2, 3))
    return v, f, g, h


@given(st.integers(0, 2**40))
@settings(max_examples=30, deadline=None)
def test_bracket_forms_agree_and_antisymmetric(seed):
    v, f, g, _ = _draw(seed)
    s = br.bracket_scale(v, ob.differential(f, v), ob.differential(g, v))
    assert abs(br.bracket(f, g, v) - br.bracket_liealg(f, g, v)) <= 1e-12 * s
    assert abs(br.bracket(f, g, v) + br.bracket(g, f, v)) <= 1e-12 * s


@given(st.integers(0, 2**40))
@settings(max_examples=15, deadline=None)
def test_jacobi(seed):
    v, f, g, h = _draw(seed)
    assert abs(br.jacobi_cycle(f, g, h, v)) <= 1e-11 * br.jacobi_scale(f, g, h, v)


def test_bracket_with_itself_is_zero():
    v, f, _, _ = _draw(5)
    assert br.bracket(f, f, v) == 0.0


def test_enstrophy_is_casimir():
    for seed in range(5):
        v, f, _, _ = _draw(seed)
        z = ob.enstrophy()
        s = br.bracket_scale(v, ob.differential(z, v), ob.differential(f, v))
        assert abs(br.bracket(z, f, v)) <= 1e-12 * s


def test_bracket_at_zero_velocity():
    v = fc.DivFreeField.zeros(GRID)
    f = ob.linear(fc.random_divfree(1, GRID))
    g = ob.linear(fc.random_divfree(2, GRID))
    assert br.bracket(f, g, v) == 0.0


def test_energy_bracket_generates_euler_flow():
    # d/dt f(u_t) = {f, E}(u) along the Euler flow
    v = fc.random_divfree(3, GRID, 3)
    f = ob.linear(fc.random_divfree(4, GRID, 3))
    rate = fc.inner(ob.differential(f, v), dy.eulerian_rhs(v))
    assert br.bracket(f, ob.energy(), v) == pytest.approx(rate, rel=1e-12)


def test_bracket_differential_matches_finite_difference():
    v, f, g, _ = _draw(11)
    w = fc.random_divfree(12, GRID)
    exact = fc.inner(br.bracket_differential(f, g, v), w)
    eps = 1e-4
    fd = (br.bracket(f, g, v + eps * w) - br.bracket(f, g, v - eps * w)) / (2 * eps)
    assert fd == pytest.approx(exact, rel=1e-6, abs=1e-8 * br.bracket_scale(v, w))


def test_derivation_rule():
    v, f, g, h = _draw(21)
    s = br.bracket_scale(v, ob.differential(f, v), ob.differential(g, v), ob.differential(h, v))
    assert abs(br.derivation_gap(f, g, h, v)) <= 1e-11 * max(s, abs(ob.value(f, v)))


def test_report_is_json_ready():
    v, f, g, _ = _draw(2)
    r = br.bracket_report(f, g, v, seed=2).to_json()
    assert r["grid"] == {"n": 32, "kmax": 4}
    assert r["gap"] <= 1e-12 * r["scale"]
    assert br.bracket_report(f, g, v, seed=2).inputs_digest == r["inputs_digest"]
