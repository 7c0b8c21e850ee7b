import ast
import inspect

import numpy as np
import pytest

from liepoisson import bracket as br
from liepoisson import fields as fc
from liepoisson import observables as ob
from liepoisson import oracle as orc
from liepoisson.fields import DivFreeField, Grid, VectorField

GRID = Grid(32, 4)


def _field(c):
    return VectorField.from_array(GRID, orc.synthesize(c, GRID.n))


@pytest.fixture(scope="module")
def data():
    ms = orc.ModeSet(3)
    return [ms.random(s, mean=(s == 0)) for s in range(3)]


def test_shares_no_transform_code():
    tree = ast.parse(inspect.getsource(orc))
    names = {a.name for node in ast.walk(tree) if isinstance(node, (ast.Import, ast.ImportFrom))
             for a in node.names}
    mods = {node.module for node in ast.walk(tree) if isinstance(node, ast.ImportFrom)}
    assert "fields" not in names and "_spectral" not in names and "hodge" not in names
    assert not {"fields", "_spectral", "hodge", "observables"} & {m for m in mods if m}
    assert "fft" not in inspect.getsource(orc).replace("no FFT", "")


def test_modeset_limits_and_reality():
    with pytest.raises(ValueError):
        orc.ModeSet(5)
    c = orc.ModeSet(2).random(1, mean=True)
    v = orc.synthesize(c, 16)
    np.testing.assert_allclose(orc.analyse(v, 2).c, c.c, atol=1e-14)


def test_synthesized_modeset_is_divfree(data):
    DivFreeField.from_vector(_field(data[1]))


def test_advect_matches_field_core(data):
    X, V = data[0], data[1]
    a = orc.synthesize(orc.oracle_advect(X, V), GRID.n)
    b = ob.advect(_field(X), _field(V)).data
    assert np.max(np.abs(a - b)) < 1e-12 * np.max(np.abs(b))


def test_advect_constant_and_bilinear(data):
    const = orc.Coeffs.zeros(1)
    const.c[1, 1] = [1.0, -2.0]
    assert np.max(np.abs(orc.oracle_advect(data[1], const).c)) == 0.0
    a = orc.oracle_advect(data[0] * 2.0 + data[2], data[1])
    b = orc.oracle_advect(data[0], data[1]) * 2.0 + orc.oracle_advect(data[2], data[1])
    np.testing.assert_allclose(a.c, b.c, atol=1e-12)


def _pairs(data):
    V = data[0]
    fo = [orc.OracleFunctional("linear", data[1]), orc.OracleFunctional("energy"),
          orc.OracleFunctional("enstrophy")]
    fl = [ob.linear(_field(data[1])), ob.energy(), ob.enstrophy()]
    return V, DivFreeField.from_vector(_field(V)), fo, fl


@pytest.mark.parametrize("a,b", [(0, 1), (0, 2), (1, 2)])
def test_bracket_matches_field_core(data, a, b):
    V, v, fo, fl = _pairs(data)
    s = br.bracket_scale(v, ob.differential(fl[a], v), ob.differential(fl[b], v))
    assert abs(orc.oracle_bracket(fo[a], fo[b], V) - br.bracket(fl[a], fl[b], v)) < 1e-12 * s
    assert orc.oracle_bracket(fo[a], fo[b], V) == -orc.oracle_bracket(fo[b], fo[a], V)


def test_bracket_zero_velocity(data):
    f = orc.OracleFunctional("linear", data[1])
    g = orc.OracleFunctional("linear", data[2])
    assert orc.oracle_bracket(f, g, orc.Coeffs.zeros(3)) == 0.0


def test_bracket_differential_matches_field_core(data):
    V, v, fo, fl = _pairs(data)
    d1 = _field(orc.oracle_bracket_differential(fo[0], fo[1], V))
    d2 = br.bracket_differential(fl[0], fl[1], v)
    assert (d1 - d2.as_vector()).norm() < 1e-12 * d2.norm()


def test_oracle_jacobi(data):
    V, _, fo, _ = _pairs(data)
    f4 = orc.OracleFunctional("linear", data[2])
    o = orc.oracle_jacobi(fo[0], fo[2], f4, V)
    s = orc.oracle_scale(V, fo[0].grad(V), fo[2].grad(V), f4.grad(V), kmax=3)
    assert abs(o) < 1e-12 * s


def test_functional_validation():
    with pytest.raises(ValueError):
        orc.OracleFunctional("helicity")
    with pytest.raises(ValueError):
        orc.OracleFunctional("linear")
