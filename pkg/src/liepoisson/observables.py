"""Advection calculus on the flat torus and smooth functionals of velocity.

An :class:`Observable` bundles a functional ``f`` on divergence-free fields
with its L2-Riesz differential ``df(v)`` (always divergence-free) and the
action of its second differential ``Ddf(v) . u``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import fields as fc
from .fields import DivFreeField, Grid, VectorField
from .hodge import leray


def advect(X: VectorField, Y: VectorField) -> VectorField:
    """Covariant derivative ``nabla_X Y = (X . grad) Y`` (flat connection)."""
    fc._check_same_grid(X, Y)
    sp = X.grid.spectral
    return VectorField._from_hat(X.grid, sp.advect(X.hat(), Y.hat()))


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """``[X, Y] = nabla_X Y - nabla_Y X``."""
    fc._check_same_grid(X, Y)
    sp = X.grid.spectral
    xh, yh = X.hat(), Y.hat()
    return VectorField._from_hat(X.grid, sp.advect(xh, yh) - sp.advect(yh, xh))


def b_op(Z: VectorField, W: VectorField) -> DivFreeField:
    """Adjoint of advection: ``<Z, nabla_Y W> = <B(Z, W), Y>`` for div-free Y.

    In the flat chart ``B(Z, W) = P_e[(DW)^T Z]``.
    """
    fc._check_same_grid(Z, W)
    sp = Z.grid.spectral
    return DivFreeField._from_hat(Z.grid, sp.leray(sp.transpose_grad_dot(Z.hat(), W.hat())))


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Observable:
    """A functional on divergence-free fields with first and second differentials.

    ``grad(v)`` returns the Riesz representative of ``df(v)`` and
    ``hess(v, u)`` returns ``Ddf(v) . u``; ``hess`` may be ``None`` when
    only first-order information exists (e.g. a bracket of observables).
    """

    name: str
    value_fn: Callable[[DivFreeField], float]
    grad_fn: Callable[[DivFreeField], DivFreeField]
    hess_fn: Optional[Callable[[DivFreeField, DivFreeField], DivFreeField]] = None
    params: dict = field(default_factory=dict)

    def describe(self) -> dict:
        return {"kind": self.name, **self.params}

    def digest(self) -> str:
        blob = json.dumps(self.describe(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def __repr__(self):
        return f"Observable({self.name})"


def value(f: Observable, v: DivFreeField) -> float:
    return float(f.value_fn(v))


def differential(f: Observable, v: DivFreeField) -> DivFreeField:
    return f.grad_fn(v)


def second_differential(f: Observable, v: DivFreeField, u: DivFreeField) -> DivFreeField:
    if f.hess_fn is None:
        raise NotImplementedError(f"{f.name} has no second differential")
    return f.hess_fn(v, u)


def _field_digest(a: VectorField) -> str:
    return hashlib.sha256(np.ascontiguousarray(a.data).tobytes()).hexdigest()[:16]


def linear(a: VectorField, **params) -> Observable:
    """``f(v) = <a, v>``; the differential is ``P_e a``."""
    a_div = leray(a)
    zero = DivFreeField.zeros(a.grid)
    return Observable(
        "linear",
        lambda v: fc.inner(a_div, v),
        lambda v: a_div,
        lambda v, u: zero,
        params or {"field": _field_digest(a)},
    )


def energy() -> Observable:
    """Kinetic energy ``1/2 <v, v>``, the Hamiltonian of the Euler flow."""
    return Observable(
        "energy",
        lambda v: 0.5 * fc.inner(v, v),
        lambda v: v,
        lambda v, u: u,
    )


def _curl_star_curl(u: VectorField) -> DivFreeField:
    sp = u.grid.spectral
    return DivFreeField._from_hat(u.grid, sp.perp_grad(sp.curl(u.hat())))


def enstrophy() -> Observable:
    """``1/2 <omega, omega>`` with ``omega = curl2d(v)``.

    ``df(v) = (d_y omega, -d_x omega)``; the second differential is the same
    operator applied to ``u``.
    """
    def val(v):
        w = fc.curl2d(v)
        return 0.5 * fc.inner(w, w)

    return Observable("enstrophy", val, _curl_star_curl, lambda v, u: _curl_star_curl(u))


def mode_moment(grid: Grid, k, part: str = "re", component: int | None = None) -> Observable:
    """Real or imaginary part of one Fourier coefficient of the velocity.

    ``component`` 0/1 picks u_x/u_y; ``None`` (default) picks the
    divergence-free polarisation ``e = (-k_y, k_x)/|k|``.  The functional is
    linear, with differential the Leray projection of a single-mode field.
    """
    kx, ky = int(k[0]), int(k[1])
    if part not in ("re", "im"):
        raise ValueError("part must be 're' or 'im'")
    if component is None:
        if kx == 0 and ky == 0:
            raise ValueError("polarised mode moment needs k != 0")
        r = math.hypot(kx, ky)
        e = np.array([-ky / r, kx / r])
    else:
        e = np.eye(2)[component]
    X, Y = grid.coords()
    phase = kx * X + ky * Y
    profile = np.cos(phase) if part == "re" else -np.sin(phase)
    a = VectorField.from_array(grid, e[:, None, None] * profile / (4.0 * math.pi**2))
    a_div = leray(a)
    n = grid.n
    zero = DivFreeField.zeros(grid)

    def val(v):
        c = np.fft.fft2(v.data, axes=(-2, -1))[:, kx % n, ky % n] / n**2
        z = complex(e @ c)
        return z.real if part == "re" else z.imag

    params = {"k": [kx, ky], "part": part, "component": component}
    return Observable("mode_moment", val, lambda v: a_div, lambda v, u: zero, params)


def product(f: Observable, g: Observable) -> Observable:
    """Pointwise product of two observables, ``(f g)(v) = f(v) g(v)``."""
    def grad_fn(v):
        return differential(g, v) * value(f, v) + differential(f, v) * value(g, v)

    def hess_fn(v, u):
        df, dg = differential(f, v), differential(g, v)
        return (dg * fc.inner(df, u) + df * fc.inner(dg, u)
                + second_differential(g, v, u) * value(f, v)
                + second_differential(f, v, u) * value(g, v))

    return Observable("product", lambda v: value(f, v) * value(g, v), grad_fn, hess_fn,
                      {"factors": [f.describe(), g.describe()]})


def combination(terms) -> Observable:
    """Linear combination ``sum c_i f_i`` from ``[(c_i, f_i), ...]``."""
    terms = [(float(c), f) for c, f in terms]

    def acc(fn):
        def go(*args):
            out = None
            for c, f in terms:
                t = fn(f, *args) * c
                out = t if out is None else out + t
            return out
        return go

    hess = acc(second_differential) if all(f.hess_fn for _, f in terms) else None
    return Observable("combination", acc(value), acc(differential), hess,
                      {"terms": [[c, f.describe()] for c, f in terms]})


def custom(name: str, value_fn, grad_fn, hess_fn=None, **params) -> Observable:
    """Register a user observable; its differential is Leray-projected on the way out."""
    def g(v):
        return leray(grad_fn(v))

    h = None if hess_fn is None else (lambda v, u: leray(hess_fn(v, u)))
    return Observable(name, value_fn, g, h, params)


def from_config(cfg: dict, grid: Grid) -> Observable:
    """Build an observable from its JSON description.

    ``{"kind": "energy"}``, ``{"kind": "enstrophy"}``,
    ``{"kind": "linear", "seed": s, "kmax": k}``,
    ``{"kind": "mode_moment", "k": [1, 0], "part": "re"}``.
    """
    kind = cfg.get("kind")
    if kind == "energy":
        return energy()
    if kind == "enstrophy":
        return enstrophy()
    if kind == "linear":
        seed = int(cfg["seed"])
        kmax = int(cfg.get("kmax", grid.kmax))
        a = fc.random_divfree(seed, grid, kmax, float(cfg.get("amplitude", 1.0)))
        return linear(a, seed=seed, kmax=kmax)
    if kind == "mode_moment":
        return mode_moment(grid, cfg["k"], cfg.get("part", "re"), cfg.get("component"))
    raise ValueError(f"unknown observable kind {kind!r}")
