import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liepoisson import fields as fc
from liepoisson.fields import DivFreeField, Grid, ScalarField, VectorField


@pytest.mark.parametrize("n,kmax", [(12, None), (20, None), (8, None), (32, 5), (32, 0)])
def test_grid_rejects_bad_sizes(n, kmax):
    with pytest.raises(ValueError):
        Grid(n, kmax)


def test_grid_defaults(grid64):
    assert grid64.kmax == 8
    assert grid64.points().shape == (64 * 64, 2)
    X, Y = grid64.coords()
    np.testing.assert_array_equal(grid64.points()[:, 0], X.ravel())


def test_fields_reject_nonfinite(grid32):
    a = np.zeros((32, 32))
    a[3, 4] = np.nan
    with pytest.raises(ValueError):
        VectorField(grid32, a, np.zeros((32, 32)))


def test_divfree_rejects_gradient(grid32):
    X, Y = grid32.coords()
    with pytest.raises(ValueError, match="divergence"):
        DivFreeField(grid32, np.cos(X), np.zeros_like(X))


def test_taylor_green_is_divfree(grid32):
    tg = fc.taylor_green(grid32)
    assert fc.divergence_norm(tg) < 1e-13


def test_spectral_derivatives_exact_on_trig(grid32):
    X, Y = grid32.coords()
    f = ScalarField(grid32, np.sin(2 * X) * np.cos(3 * Y))
    g = fc.grad(f)
    np.testing.assert_allclose(g.ux, 2 * np.cos(2 * X) * np.cos(3 * Y), atol=1e-12)
    np.testing.assert_allclose(g.uy, -3 * np.sin(2 * X) * np.sin(3 * Y), atol=1e-12)
    np.testing.assert_allclose(fc.laplacian(f).values, -13 * f.values, atol=1e-11)
    np.testing.assert_allclose(fc.laplacian_inv(fc.laplacian(f)).values, f.values, atol=1e-12)


def test_curl_of_perp_grad_is_minus_laplacian(grid32):
    psi = fc.random_streamfunction(3, grid32, 4)
    np.testing.assert_allclose(fc.curl2d(fc.perp_grad(psi)).values,
                               -fc.laplacian(psi).values, atol=1e-10)


@given(st.integers(0, 2**32))
@settings(max_examples=20, deadline=None)
def test_inner_matches_parseval(seed):
    grid = Grid(32)
    a = fc.random_vector(seed, grid)
    b = fc.random_vector(seed + 1, grid)
    assert fc.inner(a, b) == pytest.approx(fc.spectral_inner(a, b), rel=1e-12, abs=1e-12)


def test_random_fields_reproducible(grid32):
    a = fc.random_divfree(11, grid32, 3, 0.7)
    b = fc.random_divfree(11, grid32, 3, 0.7)
    np.testing.assert_array_equal(a.data, b.data)
    assert a.norm() / (2 * math.pi) == pytest.approx(0.7)
    assert np.max(np.abs(fc.to_spectrum(a).band_limit(3).coeffs - fc.to_spectrum(a).coeffs)) < 1e-15


def test_divfree_basis_orthonormal(grid32):
    basis = fc.divfree_basis(grid32, 3)
    assert len(basis) == 2 + 2 * len(fc.half_plane_modes(3))
    G = np.array([[fc.inner(a, b) for b in basis] for a in basis])
    np.testing.assert_allclose(G, np.eye(len(basis)), atol=1e-13)


@pytest.mark.parametrize("method,tol", [("spectral", 1e-12), ("bicubic", 1e-3)])
def test_interpolation_of_trig_polynomial(grid32, method, tol):
    u = fc.random_divfree(5, grid32, 3)
    pts = np.stack(np.meshgrid(np.linspace(0, 7, 9), np.linspace(-1, 5, 7)), -1)
    got = fc.interpolate(u, pts, method)
    ref = fc.trig_eval_direct(u.data, pts.reshape(-1, 2)).reshape((2,) + pts.shape[:-1])
    assert got.shape == (2, 7, 9)
    assert np.max(np.abs(got - ref)) < tol * np.max(np.abs(ref))


def test_interpolation_exact_at_nodes(grid32):
    f = ScalarField(grid32, fc.random_vector(1, grid32).ux)
    np.testing.assert_allclose(fc.interpolate(f, grid32.points(), "spectral"),
                               f.values.ravel(), atol=1e-12)


def test_interpolation_unknown_method(grid32):
    with pytest.raises(ValueError):
        fc.interpolate(fc.taylor_green(grid32), np.zeros((1, 2)), "linear")


def test_snapshot_roundtrip(tmp_path, grid32):
    u = fc.random_vector(2, grid32)
    fc.write_field(tmp_path / "u.vfield", u)
    v = fc.read_field(tmp_path / "u.vfield")
    np.testing.assert_array_equal(u.data, v.data)
    s = ScalarField(grid32, u.ux)
    fc.write_field(tmp_path / "s.vfield", s)
    np.testing.assert_array_equal(fc.read_field(tmp_path / "s.vfield").values, s.values)
    assert (tmp_path / "u.vfield").read_text().startswith("VFIELD2 v1 n=32 kind=vector")


def test_snapshot_rejects_bad_header(tmp_path):
    p = tmp_path / "bad.vfield"
    p.write_text("VFIELD9 v1 n=32\n")
    with pytest.raises(ValueError):
        fc.read_field(p)


def test_spectrum_roundtrip(grid32):
    u = fc.random_vector(4, grid32)
    s = fc.to_spectrum(u)
    np.testing.assert_allclose(fc.from_spectrum(s, grid32).data, u.data, atol=1e-14)
    assert s[(0, 0)] == pytest.approx(u.mean())


def test_bicubic_fourth_order():
    pts = np.stack(np.meshgrid(np.linspace(0.1, 6.1, 13), np.linspace(0.3, 5.9, 11)), -1)
    pts = pts.reshape(-1, 2)
    X0, Y0 = pts[:, 0], pts[:, 1]

    def f(X, Y):
        return np.sin(X + 2 * Y) + 0.5 * np.cos(3 * X - Y) + 0.3 * np.sin(2 * X) * np.cos(3 * Y)

    gaps, ns = [], [32, 64, 128]
    for n in ns:
        g = Grid(n)
        s = ScalarField(g, f(*g.coords()))
        spec = fc.interpolate(s, pts, "spectral")
        np.testing.assert_allclose(spec, f(X0, Y0), atol=1e-12)
        gaps.append(np.max(np.abs(fc.interpolate(s, pts, "bicubic") - spec)))
    slope = np.polyfit(np.log(ns), np.log(gaps), 1)[0]
    assert -slope >= 3.7


def test_spectrum_conventions(grid32):
    X, Y = grid32.coords()
    one = fc.to_spectrum(ScalarField(grid32, np.ones_like(X)))
    assert one[(0, 0)] == pytest.approx(1.0)
    assert np.sum(np.abs(one.coeffs)) == pytest.approx(1.0)
    s = fc.to_spectrum(ScalarField(grid32, np.sin(X)))
    # exp(ikx) convention: sin x = (e^{ix} - e^{-ix}) / 2i
    assert s[(1, 0)] == pytest.approx(-0.5j)
    assert s[(-1, 0)] == pytest.approx(0.5j)
    assert fc.interpolate(ScalarField(grid32, np.sin(X)), np.array([[np.pi / 3, 0.0]]))[0] == \
        pytest.approx(np.sin(np.pi / 3), abs=1e-12)
