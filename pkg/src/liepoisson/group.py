"""Volume-preserving flow maps, the reduction map and reduced derivatives.

A :class:`FlowMap` stores a periodic displacement ``d`` with
``eta(x) = x + d(x)`` (mod 2*pi).  Velocities over a map are stored in the
global flat chart, so a :class:`TangentPoint` is just ``(eta, v)`` with
``v`` sampled at the labels.  The reduction map is ``pi(eta, v) = v o eta^-1``.

On the flat torus the covariant partial derivatives of a reduced
functional ``f_R = f o pi`` have the closed forms::

    d f_R / d v   =  df(u) o eta
    d f_R / d eta = -B(df(u), u) o eta,      u = pi(eta, v)

and the group bracket pairs them with the right-invariant L2 metric, which
for volume-preserving ``eta`` is the plain L2 pairing over labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np

from . import fields as fc
from . import rng
from .fields import DivFreeField, Grid, ScalarField, VectorField
from .hodge import leray
from .observables import Observable, b_op, differential

VOLUME_HARD_LIMIT = 0.05


class InversionError(RuntimeError):
    """Raised when a flow map cannot be inverted to the requested tolerance."""

    def __init__(self, msg, residual):
        super().__init__(msg)
        self.residual = residual


@dataclass(frozen=True, eq=False)
class FlowMap:
    """A periodic displacement ``disp`` of shape ``(2, n, n)``.

    Construction checks that the displacement is finite and that the
    Jacobian determinant stays within ``VOLUME_HARD_LIMIT`` of one.  The
    measured ``max |det - 1|`` is available as :attr:`volume_error`.
    """

    grid: Grid
    disp: np.ndarray

    def __post_init__(self):
        d = np.array(self.disp, dtype=float)
        n = self.grid.n
        if d.shape != (2, n, n):
            raise ValueError(f"displacement must have shape (2, {n}, {n}), got {d.shape}")
        if not np.all(np.isfinite(d)):
            raise ValueError("displacement has non-finite entries")
        d.setflags(write=False)
        object.__setattr__(self, "disp", d)

    @classmethod
    def checked(cls, grid: Grid, disp) -> "FlowMap":
        """Build and enforce the volume invariant."""
        eta = cls(grid, disp)
        det = jacobian_det(eta).values
        if np.min(det) <= 0:
            raise ValueError("flow map is not orientation-preserving (det <= 0)")
        if eta.volume_error > VOLUME_HARD_LIMIT:
            raise ValueError(f"flow map is not volume-preserving: max |det - 1| = "
                             f"{eta.volume_error:.3g} > {VOLUME_HARD_LIMIT}")
        return eta

    @classmethod
    def identity(cls, grid: Grid) -> "FlowMap":
        return cls(grid, np.zeros((2, grid.n, grid.n)))

    @classmethod
    def translation(cls, grid: Grid, c) -> "FlowMap":
        c = np.asarray(c, dtype=float)
        return cls(grid, np.broadcast_to(c[:, None, None], (2, grid.n, grid.n)))

    @property
    def dx(self) -> np.ndarray:
        return self.disp[0]

    @property
    def dy(self) -> np.ndarray:
        return self.disp[1]

    def positions(self) -> np.ndarray:
        """Unwrapped images ``x_ij + d_ij`` as an ``(n, n, 2)`` array."""
        return np.stack(self.grid.coords(), axis=-1) + np.moveaxis(self.disp, 0, -1)

    @cached_property
    def volume_error(self) -> float:
        return float(np.max(np.abs(jacobian_det(self).values - 1.0)))

    def __repr__(self):
        return f"FlowMap(n={self.grid.n}, max|d|={np.max(np.abs(self.disp)):.3g})"


def jacobian_det(eta: FlowMap) -> ScalarField:
    """Pointwise ``det(I + Dd)`` with spectral derivatives of the displacement."""
    sp = eta.grid.spectral
    g = sp.ifft(sp.grad(sp.fft(eta.disp)))  # g[i, j] = d_j d_i
    det = (1.0 + g[0, 0]) * (1.0 + g[1, 1]) - g[0, 1] * g[1, 0]
    return ScalarField(eta.grid, det)


# ---------------------------------------------------------------------------
# Composition and inversion


def _check_grid(grid: Grid, eta: FlowMap):
    if grid.n != eta.grid.n:
        raise ValueError(f"grid mismatch: n={grid.n} vs n={eta.grid.n}")


def compose_field(u, eta: FlowMap, method: str = "spectral"):
    """``u o eta`` sampled on the grid; scalar in, scalar out; vector in, vector out."""
    _check_grid(u.grid, eta)
    vals = fc.interpolate(u, eta.positions(), method)
    if isinstance(u, ScalarField):
        return ScalarField(u.grid, vals)
    return VectorField._trusted(u.grid, vals)


def compose(eta: FlowMap, xi: FlowMap, method: str = "spectral") -> FlowMap:
    """``eta o xi``: displacement ``d_xi + d_eta o xi``."""
    _check_grid(eta.grid, xi)
    d = xi.disp + fc.interpolate(VectorField._trusted(eta.grid, eta.disp), xi.positions(), method)
    return FlowMap(eta.grid, d)


def invert(eta: FlowMap, guess: Optional[FlowMap] = None, tol: float = 1e-12,
           max_iter: int = 100, scheme: str = "newton") -> FlowMap:
    """Inverse map ``zeta`` with ``eta(zeta(y)) = y`` at every grid point.

    Solves ``e = -d(y + e)`` for the inverse displacement ``e``.
    ``scheme="picard"`` is the plain fixed-point iteration (contractive
    when ``||Dd|| < 1``).  ``scheme="newton"`` (default) is a chord Newton
    iteration: the interpolated Jacobian ``I + Dd`` is refreshed only when
    the update fails to shrink tenfold, so most iterations interpolate just
    the displacement.  Iteration stops when the largest update falls below
    ``tol``.
    """
    if scheme not in ("newton", "picard"):
        raise ValueError(f"unknown inversion scheme {scheme!r}")
    grid = eta.grid
    n = grid.n
    y = grid.points()
    e = (-eta.disp if guess is None else guess.disp).reshape(2, -1).T.copy()
    if scheme == "newton":
        sp = grid.spectral
        full = np.concatenate([eta.disp, sp.ifft(sp.grad(sp.fft(eta.disp))).reshape(4, n, n)])
    jac = None
    refresh = True
    prev = math.inf
    step = math.inf
    for _ in range(max_iter):
        pts = np.mod(y + e, 2.0 * math.pi)
        if scheme == "newton" and refresh:
            vals = fc._trig_eval(full, pts)
            a, b, c, dd = 1.0 + vals[2], vals[3], vals[4], 1.0 + vals[5]
            det = a * dd - b * c
            jac = (dd / det, -b / det, -c / det, a / det)
        else:
            vals = fc._trig_eval(eta.disp, pts)
        resid = e + vals[:2].T
        if jac is None:
            upd = -resid
        else:
            upd = -np.stack([jac[0] * resid[:, 0] + jac[1] * resid[:, 1],
                             jac[2] * resid[:, 0] + jac[3] * resid[:, 1]], axis=1)
        e = e + upd
        step = float(np.max(np.abs(upd)))
        if step < tol:
            return FlowMap(grid, e.T.reshape(2, n, n))
        refresh = step > 0.1 * prev
        prev = step
    raise InversionError(f"inversion did not converge in {max_iter} iterations "
                         f"(max update {step:.3g})", step)


def inverse(eta: FlowMap, guess: Optional[FlowMap] = None) -> FlowMap:
    """:func:`invert` with default settings, cached on ``eta``."""
    inv = eta.__dict__.get("_inverse")
    if inv is None:
        inv = invert(eta, guess=guess)
        object.__setattr__(eta, "_inverse", inv)
    return inv


def inversion_residual(eta: FlowMap, zeta: FlowMap) -> float:
    """Largest deviation from the identity over both composition orders."""
    r = 0.0
    for m in (compose(eta, zeta), compose(zeta, eta)):
        r = max(r, float(np.max(np.abs(m.disp))))
    return r


# ---------------------------------------------------------------------------
# Tangent points and the reduction map


@dataclass(frozen=True, eq=False)
class TangentPoint:
    """``(eta, v)`` with ``v`` the material velocity sampled at the labels.

    The inverse map and the reduced velocity are cached; ``inverse_guess``
    warm-starts the inversion.
    """

    eta: FlowMap
    v: VectorField
    inverse_guess: Optional[FlowMap] = None

    def __post_init__(self):
        _check_grid(self.v.grid, self.eta)

    @property
    def grid(self) -> Grid:
        return self.eta.grid

    @property
    def eta_inv(self) -> FlowMap:
        return inverse(self.eta, guess=self.inverse_guess)

    @cached_property
    def _reduced(self):
        w = compose_field(self.v, self.eta_inv)
        return leray(w), fc.divergence_norm(w)

    @property
    def u(self) -> DivFreeField:
        return self._reduced[0]

    @property
    def projection_residual(self) -> float:
        """Relative divergence of ``v o eta^-1`` before the final projection."""
        return self._reduced[1]

    @classmethod
    def at_identity(cls, v: VectorField) -> "TangentPoint":
        return cls(FlowMap.identity(v.grid), v)


def pi_reduce(p: TangentPoint, with_residual: bool = False):
    """``pi(eta, v) = P_e(v o eta^-1)``; optionally also the pre-projection divergence."""
    return (p.u, p.projection_residual) if with_residual else p.u


def right_translate(p: TangentPoint, xi: FlowMap) -> TangentPoint:
    """``TR_xi(eta, v) = (eta o xi, v o xi)``."""
    return TangentPoint(compose(p.eta, xi), compose_field(p.v, xi))


def connector(p: TangentPoint, w: VectorField) -> VectorField:
    """``(P_e(w o eta^-1)) o eta``: the right-translated Leray projection."""
    return compose_field(leray(compose_field(w, p.eta_inv)), p.eta)


def reduced_diff_v(f: Observable, p: TangentPoint) -> VectorField:
    """``df(u) o eta``."""
    return compose_field(differential(f, p.u), p.eta)


def reduced_diff_eta(f: Observable, p: TangentPoint) -> VectorField:
    """``-B(df(u), u) o eta``."""
    u = p.u
    return compose_field(-b_op(differential(f, u), u), p.eta)


def inner_at(p: TangentPoint, a: VectorField, b: VectorField) -> float:
    """Right-invariant metric over ``eta``: the L2 pairing over labels."""
    return fc.inner(a.as_vector(), b.as_vector())


def group_bracket(f: Observable, g: Observable, p: TangentPoint) -> float:
    """``<dF/deta, dG/dv> - <dF/dv, dG/deta>`` for ``F = f o pi``, ``G = g o pi``."""
    if f is g:
        return 0.0
    return (inner_at(p, reduced_diff_eta(f, p), reduced_diff_v(g, p))
            - inner_at(p, reduced_diff_v(f, p), reduced_diff_eta(g, p)))


# ---------------------------------------------------------------------------
# Generators


def shear_map(grid: Grid, fx, fy) -> FlowMap:
    """``(x, y) -> (x + fx(y), y)`` followed by ``(x, y) -> (x, y + fy(x))``.

    Both factors are time-one flows of divergence-free shear fields, so the
    composition is exactly volume-preserving; ``fx`` and ``fy`` are
    periodic callables.
    """
    X, Y = grid.coords()
    a = fx(Y)
    return FlowMap(grid, np.stack([a, fy(X + a)]))


def random_shear_map(seed: int, grid: Grid, amplitude: float = 0.3, kmax: int = 2,
                     layers: int = 2) -> FlowMap:
    """Composition of ``layers`` random shear-pair maps with profile sup-norm ``amplitude``."""
    eta = FlowMap.identity(grid)
    for layer in range(layers):
        profiles = []
        for axis in range(2):
            s = rng.derive_seed(seed, 7, layer, axis)
            c = rng.uniform(s, 2 * kmax, -1.0, 1.0)
            ks = np.arange(1, kmax + 1)

            def prof(t, c=c, ks=ks):
                t = np.asarray(t)[..., None]
                return (c[:kmax] * np.cos(ks * t) + c[kmax:] * np.sin(ks * t)).sum(-1)

            scale = amplitude / np.sum(np.abs(c))
            profiles.append(lambda t, p=prof, s=scale: s * p(t))
        eta = compose(shear_map(grid, *profiles), eta)
    return eta


# ---------------------------------------------------------------------------
# IO


def write_flowmap(path, eta: FlowMap) -> None:
    """``VMAP2 v1 n=<n>`` then one ``i j dx dy`` line per node."""
    n = eta.grid.n
    lines = [f"VMAP2 v1 n={n}"]
    for i in range(n):
        for j in range(n):
            lines.append(f"{i} {j} {eta.dx[i, j]:.17g} {eta.dy[i, j]:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_flowmap(path, kmax: int | None = None) -> FlowMap:
    lines = Path(path).read_text().splitlines()
    meta = fc._parse_header(lines[0], "VMAP2")
    n = int(meta["n"])
    rows = np.loadtxt(lines[1:], ndmin=2)
    if rows.shape[0] != n * n:
        raise ValueError(f"expected {n * n} rows, found {rows.shape[0]}")
    i = rows[:, 0].astype(int)
    j = rows[:, 1].astype(int)
    d = np.zeros((2, n, n))
    d[0, i, j] = rows[:, 2]
    d[1, i, j] = rows[:, 3]
    return FlowMap.checked(Grid(n, kmax), d)
