"""Eulerian and Lagrangian Euler flows on the torus.

Also tangent and adjoint models, and the commutation and Poisson-map residuals.

The Eulerian flow integrates vorticity ``omega`` (rfft coefficients) plus
the mean velocity ``U`` with classical RK4; velocity is recovered exactly
as ``u = U + (d_y psi, -d_x psi)`` with ``-Delta psi = omega``.  Products
use 3/2-padded transforms, so the semi-discrete system is the Galerkin
truncation to |k|_inf < n/2 (or to a user band).

The Lagrangian flow integrates ``(eta, v)`` with ``eta' = v`` and
``v' = -(grad p) o eta``, where ``grad p = -Q(nabla_u u)`` and ``u = v o eta^-1``.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import fields as fc
from .bracket import bracket, bracket_scale
from .fields import DivFreeField, Grid, ScalarField, VectorField
from . import group as gg
from .group import FlowMap, TangentPoint
from .hodge import gradient_part, leray
from .observables import Observable, advect, differential, lie_bracket

log = logging.getLogger(__name__)

AREA = 4.0 * math.pi**2


class IntegrationError(RuntimeError):
    """Raised when a trajectory produces non-finite values."""

    def __init__(self, msg, module="dynamics", step=None):
        super().__init__(msg)
        self.module = module
        self.step = step


@dataclass(frozen=True)
class IntegratorSpec:
    """Time-stepping parameters.

    ``band`` optionally re-truncates every right-hand side to
    ``|k|_inf <= band`` (Galerkin truncation to a small mode set).

    ``reproject_every`` only affects the Lagrangian flow: every that many
    steps the material velocity is replaced by a filtered ``pi(eta, v) o
    eta``.  It is off by default because the filter adds a small error per
    step; the Eulerian vorticity state is divergence-free by construction.
    """

    dt: float
    t_end: float
    scheme: str = "rk4"
    reproject_every: Optional[int] = None
    band: Optional[int] = None

    def __post_init__(self):
        if self.scheme != "rk4":
            raise ValueError(f"unsupported scheme {self.scheme!r}; only 'rk4' is available")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if self.reproject_every is not None and self.reproject_every < 1:
            raise ValueError("reproject_every must be >= 1")
        if self.band is not None and self.band < 1:
            raise ValueError("band must be >= 1")

    def steps(self) -> list[float]:
        """Step sizes covering [0, t_end]; the last one may be shorter."""
        if self.t_end == 0:
            return []
        m = self.t_end / self.dt
        k = int(round(m))
        if k >= 1 and abs(m - k) < 1e-9 * max(1.0, m):
            return [self.t_end / k] * k
        k = int(math.floor(m))
        return [self.dt] * k + [self.t_end - k * self.dt]


@dataclass
class TimeSeries:
    """Per-step diagnostics; columns match the CSV interchange format."""

    columns = ("t", "energy", "enstrophy", "momentum_x", "momentum_y",
               "vol_drift", "commutation_residual")
    rows: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def append(self, **kw):
        self.rows.append({c: kw.get(c) for c in self.columns})

    def column(self, name) -> np.ndarray:
        return np.array([np.nan if r[name] is None else r[name] for r in self.rows])

    def relative_drift(self, name) -> float:
        c = self.column(name)
        ref = abs(c[0]) if c[0] != 0 else 1.0
        return float(np.max(np.abs(c - c[0])) / ref)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns)
            for r in self.rows:
                w.writerow(["" if r[c] is None else repr(float(r[c])) for c in self.columns])


@dataclass(frozen=True)
class EulerianState:
    u: DivFreeField
    t: float


@dataclass(frozen=True)
class Conserved:
    energy: float
    enstrophy: float
    momentum_x: float
    momentum_y: float


def conserved(u: VectorField) -> Conserved:
    w = fc.curl2d(u)
    m = u.mean() * AREA
    return Conserved(0.5 * fc.inner(u, u), 0.5 * fc.inner(w, w), float(m[0]), float(m[1]))


# ---------------------------------------------------------------------------
# Eulerian right-hand sides in velocity form


def eulerian_rhs(u: DivFreeField) -> DivFreeField:
    """``du/dt = -P_e[nabla_u u]``."""
    return -leray(advect(u, u))


def pressure(u: DivFreeField) -> ScalarField:
    """Mean-zero ``p`` with ``grad p = -Q(nabla_u u)``; ``p = -Delta^-1 div(nabla_u u)``."""
    sp = u.grid.spectral
    a = sp.advect(u.hat(), u.hat())
    return ScalarField._from_hat(u.grid, sp.inv_k2 * sp.div(a))


# ---------------------------------------------------------------------------
# Vorticity model with tangent and adjoint


class VorticityModel:
    """Semi-discrete 2-D Euler in vorticity form on coefficient arrays.

    State: ``w`` (rfft coefficients of omega, mean zero), ``U`` (mean
    velocity, shape ``(..., 2)``).  Leading axes are batch axes.  The
    adjoint is taken with respect to the L2 pairing on omega plus the
    Euclidean pairing on ``U``.
    """

    def __init__(self, grid: Grid, band: Optional[int] = None):
        self.grid = grid
        self.sp = grid.spectral
        self.band = band
        self._mask = None if band is None else self.sp.band_mask(band)

    def _trunc(self, h):
        return h if self._mask is None else np.where(self._mask, h, 0.0)

    # conversions -----------------------------------------------------
    def velocity_hat(self, w, U):
        uh = self.sp.perp_grad(w * self.sp.inv_k2)
        uh[..., :, 0, 0] = U
        return uh

    def from_velocity(self, uh):
        w = self.sp.curl(uh)
        w[..., 0, 0] = 0.0
        return self._trunc(w), uh[..., :, 0, 0].real.copy()

    # dynamics --------------------------------------------------------
    def _transport(self, ah, sh):
        """P[(a . grad) s] for velocity coefficients ``ah`` and scalar ``sh``."""
        sp = self.sp
        ap = sp.to_padded_grid(ah)
        gp = sp.to_padded_grid(sp.grad(sh))
        return self._trunc(sp.from_padded_grid((ap * gp).sum(axis=-3)))

    def rhs(self, w, U):
        return -self._transport(self.velocity_hat(w, U), w), np.zeros_like(U)

    def tangent(self, w, U, dw, dU):
        return (-self._transport(self.velocity_hat(dw, dU), w)
                - self._transport(self.velocity_hat(w, U), dw)), np.zeros_like(dU)

    def adjoint(self, w, U, lw):
        """Transpose of :meth:`tangent` applied to an omega-sensitivity ``lw``.

        The U-row of the Jacobian is zero, so only ``lw`` enters.
        """
        sp = self.sp
        lw = self._trunc(lw)
        # a = lambda grad(omega), projected to the grid band
        gp = sp.to_padded_grid(sp.grad(w))
        lp = sp.to_padded_grid(lw)
        ah = sp.from_padded_grid(lp[..., None, :, :] * gp)
        out_w = self._trunc(-sp.inv_k2 * sp.curl(ah))
        out_w = out_w + self._transport(self.velocity_hat(w, U), lw)
        out_U = -AREA * ah[..., :, 0, 0].real
        return out_w, out_U


def _rk4_step(f, y, dt, k1=None):
    if k1 is None:
        k1 = f(*y)
    s2 = tuple(a + 0.5 * dt * b for a, b in zip(y, k1))
    k2 = f(*s2)
    s3 = tuple(a + 0.5 * dt * b for a, b in zip(y, k2))
    k3 = f(*s3)
    s4 = tuple(a + dt * b for a, b in zip(y, k3))
    k4 = f(*s4)
    return tuple(a + dt / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4)
                 for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))


def _check_cfl(u: VectorField, dt: float, series: TimeSeries):
    umax = float(np.max(np.hypot(u.ux, u.uy)))
    bound = u.grid.h / (2.0 * umax) if umax > 0 else math.inf
    if dt > bound:
        msg = f"dt={dt:g} exceeds stability bound h/(2 max|u|)={bound:.3g}"
        series.warnings.append(msg)
        log.warning(msg)


def _diagnostics(model: VorticityModel, w, U, t, series: TimeSeries):
    sp = model.sp
    uh = model.velocity_hat(w, U)
    e = 0.5 * float(sp.inner(uh, uh, ncomp_axes=1))
    z = 0.5 * float(sp.inner(w, w))
    series.append(t=t, energy=e, enstrophy=z, momentum_x=AREA * float(U[0]),
                  momentum_y=AREA * float(U[1]))


def _finite_or_raise(arrs, step, module):
    for a in arrs:
        if not np.all(np.isfinite(a)):
            raise IntegrationError(f"non-finite state at step {step}", module, step)


def _initial_state(model: VorticityModel, u0: VectorField):
    return model.from_velocity(u0.hat())


def evolve_eulerian(u0: DivFreeField, spec: IntegratorSpec, record: bool = True,
                    trajectory: Optional[list] = None, on_step=None):
    """Integrate the Euler equations from ``u0``; returns ``(EulerianState, TimeSeries)``.

    At ``t_end = 0`` the input field is returned unchanged.  When
    ``trajectory`` is a list, the state before every step is appended to it
    (used by the adjoint).  ``on_step(t, u)`` is called after every step.
    """
    grid = u0.grid
    model = VorticityModel(grid, spec.band)
    series = TimeSeries()
    _check_cfl(u0, spec.dt, series)
    w, U = _initial_state(model, u0)
    t = 0.0
    if record:
        _diagnostics(model, w, U, t, series)
    steps = spec.steps()
    if not steps:
        return EulerianState(u0, 0.0), series
    for i, dt in enumerate(steps):
        if trajectory is not None:
            trajectory.append((w, U, dt))
        w, U = _rk4_step(model.rhs, (w, U), dt)
        _finite_or_raise((w,), i + 1, "dynamics.evolve_eulerian")
        t += dt
        if record:
            _diagnostics(model, w, U, t, series)
        if on_step is not None:
            on_step(t, DivFreeField._from_hat(grid, model.velocity_hat(w, U)))
    u = DivFreeField._from_hat(grid, model.velocity_hat(w, U))
    return EulerianState(u, t), series


def _stack_fields(ws) -> np.ndarray:
    if isinstance(ws, VectorField):
        return ws.data[None]
    return np.stack([w.data for w in ws])


def linearized_eulerian(u0: DivFreeField, w0, spec: IntegratorSpec):
    """Tangent-linear flow ``DF_t(u0) . w0``.

    ``w0`` may be one field or a sequence (propagated together as a batch).
    The tangent is integrated jointly with the base so that it is the exact
    derivative of the discrete RK4 map.
    """
    grid = u0.grid
    model = VorticityModel(grid, spec.band)
    single = isinstance(w0, VectorField)
    batch = _stack_fields(w0)
    w, U = _initial_state(model, u0)
    dw, dU = model.from_velocity(grid.spectral.fft(batch))

    def f(w, U, dw, dU):
        r = model.rhs(w, U)
        t = model.tangent(w, U, dw, dU)
        return r[0], r[1], t[0], t[1]

    y = (w, U, dw, dU)
    for i, dt in enumerate(spec.steps()):
        y = _rk4_step(f, y, dt)
        _finite_or_raise(y[2:3], i + 1, "dynamics.linearized_eulerian")
    out = grid.spectral.ifft(model.velocity_hat(y[2], y[3]))
    fields = [DivFreeField._trusted(grid, o) for o in out]
    return fields[0] if single else fields


def adjoint_gradient(u0: DivFreeField, spec: IntegratorSpec, terminal) -> tuple:
    """Discrete adjoint of the RK4 flow map.

    ``terminal(u_t)`` returns the velocity-space sensitivity (a field or a
    list of fields) at the final time.  Returns ``(u_t, grads)`` where each
    gradient is ``DF_t(u0)^T . sensitivity``, a divergence-free field.
    """
    grid = u0.grid
    sp = grid.spectral
    model = VorticityModel(grid, spec.band)
    traj: list = []
    state, _ = evolve_eulerian(u0, spec, record=False, trajectory=traj)
    sens = terminal(state.u)
    single = isinstance(sens, VectorField)
    batch = _stack_fields(sens)
    bh = sp.fft(batch)
    # velocity sensitivity -> (omega, U) adjoint: L^T w = -Delta^-1 curl w, mean * AREA
    lw = model._trunc(sp.inv_k2 * sp.curl(bh))
    lw[..., 0, 0] = 0.0
    lU = AREA * bh[..., :, 0, 0].real
    for w, U, dt in reversed(traj):
        lw, lU = _rk4_adjoint_step(model, (w, U), (lw, lU), dt)
    gh = sp.perp_grad(lw)
    gh[..., :, 0, 0] = lU / AREA
    out = [DivFreeField._trusted(grid, g) for g in sp.ifft(gh)]
    return state.u, (out[0] if single else out)


def _rk4_adjoint_step(model: VorticityModel, y, lam, dt):
    f = model.rhs
    k1 = f(*y)
    s2 = tuple(a + 0.5 * dt * b for a, b in zip(y, k1))
    k2 = f(*s2)
    s3 = tuple(a + 0.5 * dt * b for a, b in zip(y, k2))
    k3 = f(*s3)
    s4 = tuple(a + dt * b for a, b in zip(y, k3))

    def add(a, b, c=1.0):
        return tuple(x + c * z for x, z in zip(a, b))

    def jt(s, lk):
        return model.adjoint(s[0], s[1], lk[0])

    kb4 = tuple(l * (dt / 6.0) for l in lam)
    kb3 = tuple(l * (dt / 3.0) for l in lam)
    kb2 = tuple(l * (dt / 3.0) for l in lam)
    kb1 = tuple(l * (dt / 6.0) for l in lam)
    out = lam
    sb4 = jt(s4, kb4)
    out = add(out, sb4)
    kb3 = add(kb3, sb4, dt)
    sb3 = jt(s3, kb3)
    out = add(out, sb3)
    kb2 = add(kb2, sb3, 0.5 * dt)
    sb2 = jt(s2, kb2)
    out = add(out, sb2)
    kb1 = add(kb1, sb2, 0.5 * dt)
    sb1 = jt(y, kb1)
    return add(out, sb1)


# ---------------------------------------------------------------------------
# Lagrangian flow on (eta, v)


@dataclass(frozen=True)
class LagrangianState:
    p: TangentPoint
    t: float


def spray_rhs(p: TangentPoint) -> tuple[VectorField, VectorField]:
    """``(eta', v') = (v, -(grad p) o eta)`` with ``u = pi(eta, v)``.

    The Euler equations give ``grad p = -Q(nabla_u u)``, so the material
    acceleration is ``Q(nabla_u u) o eta``.
    """
    u = p.u
    return p.v.as_vector(), gg.compose_field(gradient_part(advect(u, u)), p.eta)


def _reproject(p: TangentPoint) -> np.ndarray:
    # 2/3-rule filter: unfiltered re-interpolation amplifies the top modes
    sp = p.grid.spectral
    w = gg.compose_field(p.u, p.eta).data
    return sp.ifft(sp.truncate(sp.fft(w), p.grid.n // 3))


def evolve_lagrangian(p0: TangentPoint, spec: IntegratorSpec, record: bool = True,
                      on_step=None):
    """RK4 on ``(eta, v)``; returns ``(LagrangianState, TimeSeries)``.

    Each right-hand side evaluation inverts the current map, warm-started
    from a first-order prediction off the inverse at the start of the step.
    The series records the label energy ``1/2 <v, v>`` and
    ``max |det D eta - 1|``.  ``on_step(t, p)`` is called after every step.
    """
    grid = p0.grid
    series = TimeSeries()
    _check_cfl(p0.v, spec.dt, series)

    def point(d, v, guess=None, eta=None):
        eta = FlowMap(grid, d) if eta is None else eta
        g = None if guess is None else FlowMap(grid, guess)
        return TangentPoint(eta, VectorField._trusted(grid, v), g)

    def stage(p):
        a, b = spray_rhs(p)
        return a.data, b.data, p.u.data

    def step(p, dt):
        # inverse of eta_0 + c dt k is approximately zeta_0 - c dt (k o zeta_0)
        # and k o zeta_0 is close to the stage's reduced velocity
        d0, v0 = p.eta.disp, p.v.data
        e0 = p.eta_inv.disp
        k1 = stage(p)
        k2 = stage(point(d0 + 0.5 * dt * k1[0], v0 + 0.5 * dt * k1[1], e0 - 0.5 * dt * k1[2]))
        k3 = stage(point(d0 + 0.5 * dt * k2[0], v0 + 0.5 * dt * k2[1], e0 - 0.5 * dt * k2[2]))
        k4 = stage(point(d0 + dt * k3[0], v0 + dt * k3[1], e0 - dt * k3[2]))
        comb = [(a + 2 * b + 2 * c + d) / 6.0 for a, b, c, d in zip(k1, k2, k3, k4)]
        return d0 + dt * comb[0], v0 + dt * comb[1], e0 - dt * comb[2]

    def record_row(t, p):
        if record:
            series.append(t=t, energy=0.5 * fc.inner(p.v.as_vector(), p.v.as_vector()),
                          vol_drift=p.eta.volume_error)

    record_row(0.0, p0)
    steps = spec.steps()
    if not steps:
        return LagrangianState(p0, 0.0), series
    p = p0
    t = 0.0
    for i, dt in enumerate(steps):
        d, v, e = step(p, dt)
        _finite_or_raise((d, v), i + 1, "dynamics.evolve_lagrangian")
        t += dt
        p = point(d, v, e)
        if p.eta.volume_error > gg.VOLUME_HARD_LIMIT:
            raise IntegrationError(f"volume drift {p.eta.volume_error:.3g} at step {i + 1}",
                                   "dynamics.evolve_lagrangian", i + 1)
        if spec.reproject_every and (i + 1) % spec.reproject_every == 0:
            p = point(None, _reproject(p), eta=p.eta)
        record_row(t, p)
        if on_step is not None:
            on_step(t, p)
    return LagrangianState(p, t), series


def commutation_residual(u0: DivFreeField, spec: IntegratorSpec) -> TimeSeries:
    """``||pi(F_t(e, u0)) - F~_t(u0)|| / ||u0||`` after every step.

    Returns the Lagrangian series with the ``commutation_residual`` column
    filled in (0 at t = 0).
    """
    eul: list = []
    evolve_eulerian(u0, spec, record=False, on_step=lambda t, u: eul.append(u))
    ref = max(u0.norm(), np.finfo(float).tiny)
    lag: list = []
    _, series = evolve_lagrangian(TangentPoint.at_identity(u0), spec,
                                  on_step=lambda t, p: lag.append(p.u))
    series.rows[0]["commutation_residual"] = 0.0
    for row, a, b in zip(series.rows[1:], lag, eul):
        row["commutation_residual"] = (a - b).norm() / ref
    return series


# ---------------------------------------------------------------------------
# Evolved differentials and the Poisson-map residual


def _evolved_differentials(fs, u0: DivFreeField, spec: IntegratorSpec,
                           basis_kmax: Optional[int], method: str):
    grid = u0.grid
    if method == "adjoint":
        return adjoint_gradient(u0, spec, lambda ut: [differential(f, ut) for f in fs])
    if method != "basis":
        raise ValueError(f"unknown method {method!r}")
    kb = grid.kmax if basis_kmax is None else basis_kmax
    if kb > grid.kmax:
        raise ValueError(f"basis_kmax={kb} exceeds grid kmax={grid.kmax}")
    basis = fc.divfree_basis(grid, kb)
    if not spec.steps():
        ut, images = u0, basis
    else:
        ut = evolve_eulerian(u0, spec, record=False)[0].u
        images = linearized_eulerian(u0, basis, spec)
    stack = np.stack([b.data for b in basis])
    out = []
    for f in fs:
        df = differential(f, ut)
        coef = np.array([fc.inner(df, im) for im in images])
        out.append(DivFreeField._trusted(grid, np.tensordot(coef, stack, axes=1)))
    return ut, out


def evolved_differential(f: Observable, u0: DivFreeField, spec: IntegratorSpec,
                         basis_kmax: Optional[int] = None, method: str = "basis") -> DivFreeField:
    """Riesz representative of ``d(f o F~_t)(u0) = DF~_t(u0)^T df(F~_t u0)``.

    ``method="basis"`` propagates the orthonormal divergence-free Fourier
    basis with ``|k|_inf <= basis_kmax`` through the tangent-linear model
    and assembles ``sum_b <df(u_t), DF~_t b> b``; it is exact when the
    dynamics are truncated to that band.  ``method="adjoint"`` applies the
    discrete adjoint of the RK4 map and is exact for any band.
    """
    return _evolved_differentials([f], u0, spec, basis_kmax, method)[1][0]


@dataclass(frozen=True)
class PoissonMapResult:
    residual: float
    lhs: float
    rhs: float
    scale: float

    @property
    def normalized(self) -> float:
        return abs(self.residual) / self.scale if self.scale > 0 else abs(self.residual)


def poisson_map_check(f: Observable, g: Observable, u0: DivFreeField, spec: IntegratorSpec,
                      basis_kmax: Optional[int] = None, method: str = "basis") -> PoissonMapResult:
    """``{f o F~_t, g o F~_t}(u0) - {f, g}(F~_t u0)`` with its bracket scale.

    The pulled-back bracket is ``<[dG, dF], u0>`` with ``dF``, ``dG`` the
    evolved differentials.  The scale is :func:`bracket_scale` at the final
    state.
    """
    if f is g or not spec.steps():
        return PoissonMapResult(0.0, 0.0, 0.0, 0.0)
    ut, (dF, dG) = _evolved_differentials([f, g], u0, spec, basis_kmax, method)
    lhs = fc.inner(lie_bracket(dG, dF), u0)
    rhs = bracket(f, g, ut)
    scale = bracket_scale(ut, differential(f, ut), differential(g, ut))
    return PoissonMapResult(lhs - rhs, lhs, rhs, scale)


def poisson_map_residual(f: Observable, g: Observable, u0: DivFreeField, spec: IntegratorSpec,
                         basis_kmax: Optional[int] = None, method: str = "basis") -> float:
    """``|{f o F~_t, g o F~_t}(u0) - {f, g}(F~_t u0)|``; exactly 0 at t = 0 and for f = g."""
    return abs(poisson_map_check(f, g, u0, spec, basis_kmax, method).residual)
