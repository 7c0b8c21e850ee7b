"""Verification suites for the bracket calculus.

Each suite takes an :class:`~liepoisson.config.ExperimentConfig` and
returns a :class:`SuiteResult` of named checks (measured value, tolerance,
pass flag) plus optional convergence tables.  Samples are drawn from
seeds derived from ``config.seed`` so every suite is reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import bracket as br
from . import dynamics as dy
from . import fields as fc
from . import group as gg
from . import hodge
from . import observables as ob
from . import oracle as orc
from . import rng
from .config import ExperimentConfig
from .fields import DivFreeField, Grid

AREA = 4.0 * math.pi**2
TINY = 1e-300


@dataclass
class CheckResult:
    name: str
    measured: float
    tolerance: float
    passed: bool
    comparator: str = "<="
    details: dict = field(default_factory=dict)
    informational: bool = False

    def to_json(self) -> dict:
        return {"name": self.name, "measured": _num(self.measured), "tolerance": self.tolerance,
                "comparator": self.comparator, "pass": bool(self.passed),
                "informational": self.informational,
                "details": {k: _num(v) for k, v in sorted(self.details.items())}}


@dataclass
class ConvergenceTable:
    name: str
    parameter: str
    levels: list
    residuals: list
    order: float

    def to_json(self) -> dict:
        return {"name": self.name, "parameter": self.parameter,
                "rows": [{"level": _num(a), "residual": _num(b)}
                         for a, b in zip(self.levels, self.residuals)],
                "fitted_order": _num(self.order)}


@dataclass
class SuiteResult:
    name: str
    checks: list = field(default_factory=list)
    tables: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if not c.informational)


def _num(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    return x


def upper(name, measured, tol, **details) -> CheckResult:
    return CheckResult(name, float(measured), tol, bool(measured <= tol), "<=", details)


def lower(name, measured, tol, **details) -> CheckResult:
    return CheckResult(name, float(measured), tol, bool(measured >= tol), ">=", details)


def fitted_order(levels, residuals) -> float:
    """Least-squares slope of ``log residual`` against ``log level``."""
    x = np.log(np.asarray(levels, dtype=float))
    y = np.log(np.maximum(np.abs(np.asarray(residuals, dtype=float)), TINY))
    return float(np.polyfit(x, y, 1)[0])


def _seed(cfg, *labels) -> int:
    return rng.derive_seed(cfg.seed, *labels)


def _grid(cfg, n=None, kmax=None) -> Grid:
    return Grid(n or cfg.grid.n, kmax if kmax is not None else cfg.grid.kmax)


def library_observable(seed: int, grid: Grid, kmax: int) -> ob.Observable:
    """A deterministic draw from the observable library."""
    kind = int(rng.splitmix64(seed, 1)[0] % np.uint64(7))

    def lin(s):
        return ob.linear(fc.random_divfree(rng.derive_seed(seed, s), grid, kmax))

    if kind == 0:
        return lin(1)
    if kind == 1:
        return ob.energy()
    if kind == 2:
        return ob.enstrophy()
    if kind == 3:
        k = rng.splitmix64(seed, 2, 1) % np.uint64(kmax)
        return ob.mode_moment(grid, (int(k[0]) + 1, int(k[1])), "re" if seed % 2 else "im")
    if kind == 4:
        return ob.product(lin(1), lin(2))
    if kind == 5:
        return ob.product(lin(1), ob.energy())
    return ob.combination([(0.5, lin(1)), (-1.5, ob.enstrophy()), (2.0, ob.energy())])


# ---------------------------------------------------------------------------
# hodge


def check_hodge(cfg: ExperimentConfig) -> SuiteResult:
    grid = _grid(cfg)
    m = cfg.option("samples", 200, quick=40)
    tol = cfg.tol("hodge")
    idem = orth = recon = ortho_parts = 0.0
    for i in range(m):
        X = fc.random_vector(_seed(cfg, 1, i), grid, grid.kmax)
        Z = fc.random_divfree(_seed(cfg, 2, i), grid, grid.kmax)
        parts = hodge.decompose(X)
        P = hodge.leray(X)
        nx = X.norm()
        idem = max(idem, (hodge.leray(P) - P).norm() / nx)
        orth = max(orth, abs(fc.inner(Z, X) - fc.inner(Z, P)) / (Z.norm() * nx))
        ortho_parts = max(ortho_parts, abs(fc.inner(P, X - P)) / nx**2)
        recon = max(recon, (parts.reconstruct() - X).norm() / nx)
    s = SuiteResult("hodge")
    s.checks += [upper("hodge.idempotence", idem, tol, samples=m, n=grid.n),
                 upper("hodge.orthogonality_divfree", orth, tol, samples=m),
                 upper("hodge.orthogonality_parts", ortho_parts, tol, samples=m),
                 upper("hodge.reconstruction", recon, tol, samples=m)]
    return s


# ---------------------------------------------------------------------------
# calculus


def check_calculus(cfg: ExperimentConfig) -> SuiteResult:
    grid = _grid(cfg)
    K = grid.kmax
    m = cfg.option("samples", 100, quick=20)
    tol = cfg.tol("calculus")
    anti = sym = badj = 0.0
    for i in range(m):
        X, Y, W = (fc.random_divfree(_seed(cfg, 3, i, j), grid, K) for j in range(3))
        Z = fc.random_vector(_seed(cfg, 4, i), grid, K)
        scale = br.bracket_scale(X, Y, W)
        a = fc.inner(Y, ob.advect(X, W)) + fc.inner(ob.advect(X, Y), W)
        anti = max(anti, abs(a) / scale)
        b = fc.inner(Z, ob.advect(Y, W)) - fc.inner(ob.b_op(Z, W), Y)
        badj = max(badj, abs(b) / br.bracket_scale(Y, Z.as_vector(), W))
        f = library_observable(_seed(cfg, 5, i), grid, K)
        v = fc.random_divfree(_seed(cfg, 6, i), grid, K)
        l1 = fc.inner(ob.second_differential(f, v, X), Y)
        l2 = fc.inner(X, ob.second_differential(f, v, Y))
        ref = max(abs(l1), abs(l2),
                  ob.second_differential(f, v, X).norm() * Y.norm(), TINY)
        sym = max(sym, abs(l1 - l2) / ref)
    s = SuiteResult("calculus")
    s.checks += [upper("calculus.advection_antisymmetry", anti, tol, samples=m),
                 upper("calculus.second_differential_symmetry", sym, tol, samples=m),
                 upper("calculus.b_adjointness", badj, tol, samples=m)]
    return s


# ---------------------------------------------------------------------------
# bracket


def _oracle_pair(seed: int, K: int, grid: Grid):
    """Matching (oracle, library) functional pairs and fields for one sample."""
    ms = orc.ModeSet(K)
    coeffs = [ms.random(rng.derive_seed(seed, j), mean=(j == 0)) for j in range(3)]

    def to_field(c):
        return fc.VectorField.from_array(grid, orc.synthesize(c, grid.n))

    V = coeffs[0]
    v = DivFreeField.from_vector(to_field(V))
    fo = [orc.OracleFunctional("linear", coeffs[1]), orc.OracleFunctional("energy"),
          orc.OracleFunctional("enstrophy"), orc.OracleFunctional("linear", coeffs[2])]
    fl = [ob.linear(to_field(coeffs[1])), ob.energy(), ob.enstrophy(),
          ob.linear(to_field(coeffs[2]))]
    return V, v, fo, fl


def check_bracket(cfg: ExperimentConfig) -> SuiteResult:
    grid = _grid(cfg)
    K = grid.kmax
    m = cfg.option("samples", 100, quick=20)
    m_or = cfg.option("oracle_samples", 10, quick=3)
    tol = cfg.tol("bracket")
    gap = anti = deriv = cas = 0.0
    for i in range(m):
        v = fc.random_divfree(_seed(cfg, 7, i), grid, K)
        f = library_observable(_seed(cfg, 8, i), grid, K)
        g = library_observable(_seed(cfg, 9, i), grid, K)
        h = library_observable(_seed(cfg, 10, i), grid, K)
        if f.name == g.name and f.name in ("energy", "enstrophy"):
            g = ob.linear(fc.random_divfree(_seed(cfg, 11, i), grid, K))
        rep = br.bracket_report(f, g, v, seed=cfg.seed)
        gap = max(gap, rep.gap / rep.scale)
        anti = max(anti, abs(br.bracket(f, g, v) + br.bracket(g, f, v)) / rep.scale)
        sc3 = br.bracket_scale(v, ob.differential(f, v), ob.differential(g, v),
                               ob.differential(h, v))
        fg_scale = max(sc3, abs(ob.value(f, v)) * rep.scale + abs(ob.value(g, v)) * rep.scale, TINY)
        deriv = max(deriv, abs(br.derivation_gap(f, g, h, v)) / fg_scale)
        z = ob.enstrophy()
        cas = max(cas, abs(br.bracket(z, f, v))
                  / max(br.bracket_scale(v, ob.differential(z, v), ob.differential(f, v)), TINY))
    # oracle comparison on K <= 3 data
    og = Grid(32, 4)
    ogap = 0.0
    for i in range(m_or):
        V, v, fo, fl = _oracle_pair(_seed(cfg, 12, i), 3, og)
        for a in range(4):
            for b in range(4):
                if a == b:
                    continue
                x = orc.oracle_bracket(fo[a], fo[b], V)
                y = br.bracket(fl[a], fl[b], v)
                sc = br.bracket_scale(v, ob.differential(fl[a], v), ob.differential(fl[b], v))
                ogap = max(ogap, abs(x - y) / sc)
    s = SuiteResult("bracket")
    s.checks += [upper("bracket.definition_vs_liealgebra", gap, tol, samples=m),
                 upper("bracket.antisymmetry", anti, tol, samples=m),
                 upper("bracket.derivation", deriv, cfg.tol("derivation"), samples=m),
                 upper("bracket.enstrophy_casimir", cas, cfg.tol("casimir"), samples=m),
                 upper("bracket.oracle_agreement", ogap, cfg.tol("bracket_oracle"),
                       samples=m_or, K=3)]
    return s


# ---------------------------------------------------------------------------
# jacobi


def check_jacobi(cfg: ExperimentConfig) -> SuiteResult:
    grid = _grid(cfg)
    K = grid.kmax
    m = cfg.option("samples", 50, quick=10)
    worst = 0.0
    kinds = []
    for i in range(m):
        v = fc.random_divfree(_seed(cfg, 13, i), grid, K)
        f, g, h = (library_observable(_seed(cfg, 14, i, j), grid, K) for j in range(3))
        o = br.jacobi_cycle(f, g, h, v)
        worst = max(worst, abs(o) / br.jacobi_scale(f, g, h, v))
        kinds.append("/".join(x.name for x in (f, g, h)))
    s = SuiteResult("jacobi")
    s.checks.append(upper("jacobi.normalized_cycle", worst, cfg.tol("jacobi"),
                          samples=m, kmax=K, n=grid.n, distinct_triples=len(set(kinds))))
    return s


# ---------------------------------------------------------------------------
# reduction


def _reduction_gap(seed: int, grid: Grid, amplitude: float, method: str = "spectral") -> float:
    """Normalized ``|group_bracket - bracket|`` at a generated shear map."""
    K = 3
    eta = gg.random_shear_map(rng.derive_seed(seed, 1), grid, amplitude)
    u = fc.random_divfree(rng.derive_seed(seed, 2), grid, K)
    f = ob.product(ob.linear(fc.random_divfree(rng.derive_seed(seed, 3), grid, K)), ob.energy())
    g = ob.linear(fc.random_divfree(rng.derive_seed(seed, 4), grid, K))
    p = gg.TangentPoint(eta, gg.compose_field(u, eta, method))
    v = gg.pi_reduce(p)
    scale = br.bracket_scale(v, ob.differential(f, v), ob.differential(g, v))
    return abs(gg.group_bracket(f, g, p) - br.bracket(f, g, v)) / scale


def check_reduction(cfg: ExperimentConfig) -> SuiteResult:
    m = cfg.option("maps", 10, quick=3)
    levels = cfg.option("levels", [32, 48, 64])
    amp = cfg.option("map_amplitude", 0.4)
    method = cfg.interpolation
    s = SuiteResult("reduction")
    # identity map
    grid = _grid(cfg)
    K = min(3, grid.kmax)
    worst_e = 0.0
    for i in range(m):
        v = fc.random_divfree(_seed(cfg, 15, i), grid, K)
        f = library_observable(_seed(cfg, 16, i), grid, K)
        g = library_observable(_seed(cfg, 17, i), grid, K)
        p = gg.TangentPoint.at_identity(v)
        sc = br.bracket_scale(v, ob.differential(f, v), ob.differential(g, v))
        worst_e = max(worst_e, abs(gg.group_bracket(f, g, p) - br.bracket(f, g, v)) / sc)
    s.checks.append(upper("reduction.identity_gap", worst_e, cfg.tol("reduction_identity"),
                          samples=m))
    # generated maps under refinement
    gaps = np.zeros((m, len(levels)))
    for j, n in enumerate(levels):
        g_n = Grid(n)
        for i in range(m):
            gaps[i, j] = _reduction_gap(_seed(cfg, 18, i), g_n, amp, method)
    finest = float(np.max(gaps[:, -1]))
    worst = gaps.max(axis=0)
    orders = [fitted_order([1.0 / n for n in levels], gaps[i]) for i in range(m)]
    s.checks.append(upper("reduction.map_gap_finest", finest, cfg.tol("reduction_maps"),
                          maps=m, n=levels[-1], interpolation=method))
    s.checks.append(lower("reduction.refinement_order", min(orders), cfg.tol("reduction_order"),
                          levels=list(levels)))
    s.tables.append(ConvergenceTable("reduction.map_gap", "n", list(levels), list(worst),
                                     fitted_order([1.0 / n for n in levels], worst)))
    # right invariance under a volume-preserving xi; eta o xi must stay
    # resolved on the grid, so xi is drawn milder than eta by default
    grid = _grid(cfg)
    xi_amp = cfg.option("xi_amplitude", amp / 2)
    ri = 0.0
    for i in range(m):
        eta = gg.random_shear_map(_seed(cfg, 19, i), grid, amp)
        xi = gg.random_shear_map(_seed(cfg, 20, i), grid, xi_amp)
        u = fc.random_divfree(_seed(cfg, 21, i), grid, 3)
        p = gg.TangentPoint(eta, gg.compose_field(u, eta, method))
        a = gg.pi_reduce(p)
        b = gg.pi_reduce(gg.right_translate(p, xi))
        ri = max(ri, (a - b).norm() / a.norm())
    s.checks.append(upper("reduction.right_invariance", ri, cfg.tol("right_invariance"),
                          maps=m, n=grid.n, eta_amplitude=amp, xi_amplitude=xi_amp))
    return s


# ---------------------------------------------------------------------------
# dynamics


def check_dynamics(cfg: ExperimentConfig) -> SuiteResult:
    n = cfg.option("n", 64, quick=32)
    grid = Grid(n)
    dt = cfg.option("dt", 1e-3)
    t_end = cfg.option("t_end", 1.0, quick=0.25)
    spec = dy.IntegratorSpec(dt=dt, t_end=t_end)
    s = SuiteResult("dynamics")
    tg = fc.taylor_green(grid)
    st, _ = dy.evolve_eulerian(tg, spec, record=False)
    s.checks.append(upper("dynamics.taylor_green_steady", (st.u - tg).norm() / tg.norm(),
                          cfg.tol("taylor_green_steady"), n=n, dt=dt, t=t_end))
    kmax = min(5, grid.kmax)
    mean = fc.DivFreeField._trusted(grid, np.stack([np.full((n, n), 0.3), np.full((n, n), -0.2)]))
    u0 = fc.random_divfree(_seed(cfg, 22), grid, kmax) + mean
    _, series = dy.evolve_eulerian(u0, spec)
    s.checks.append(upper("dynamics.energy_drift", series.relative_drift("energy"),
                          cfg.tol("energy_drift"), n=n, kmax=kmax, t=t_end))
    s.checks.append(upper("dynamics.enstrophy_drift", series.relative_drift("enstrophy"),
                          cfg.tol("enstrophy_drift"), n=n, kmax=kmax, t=t_end))
    mom = max(np.max(np.abs(series.column(c) - series.column(c)[0]))
              for c in ("momentum_x", "momentum_y"))
    s.checks.append(upper("dynamics.momentum", mom / AREA, cfg.tol("momentum"),
                          note="absolute change of the mean velocity"))
    if series.warnings:
        s.checks[-1].details["warnings"] = "; ".join(series.warnings)
    return s


# ---------------------------------------------------------------------------
# commute


def check_commute(cfg: ExperimentConfig) -> SuiteResult:
    s = SuiteResult("commute")
    n = cfg.option("n", 64, quick=32)
    dt = cfg.option("dt", 1e-3, quick=2e-3)
    t_end = cfg.option("t_end", 0.5, quick=0.1)
    grid = Grid(n)
    series = dy.commutation_residual(fc.taylor_green(grid), dy.IntegratorSpec(dt=dt, t_end=t_end))
    s.checks.append(upper("commute.taylor_green", float(np.nanmax(series.column("commutation_residual"))),
                          cfg.tol("commute_taylor_green"), n=n, dt=dt, t=t_end))
    s.checks.append(upper("commute.taylor_green_volume", float(np.max(series.column("vol_drift"))),
                          cfg.tol("volume_drift"), n=n, dt=dt, t=t_end))
    # dt refinement on random data in the time-error dominated regime
    dts = cfg.option("order_dts", [0.05, 0.025])
    amp = cfg.option("order_amplitude", 0.3)
    t_ord = cfg.option("order_t_end", 0.25)
    g64 = Grid(cfg.option("order_n", 64))
    u0 = fc.random_divfree(_seed(cfg, 23), g64, min(4, g64.kmax), amp)
    res = []
    for h in dts:
        ser = dy.commutation_residual(u0, dy.IntegratorSpec(dt=h, t_end=t_ord))
        res.append(float(ser.column("commutation_residual")[-1]))
    order = fitted_order(dts, res)
    s.checks.append(lower("commute.dt_order", order, cfg.tol("commute_order"),
                          dts=list(dts), residuals=res, amplitude=amp, n=g64.n))
    s.tables.append(ConvergenceTable("commute.random", "dt", list(dts), res, order))
    return s


# ---------------------------------------------------------------------------
# poisson-map


def _poisson_tuple(cfg, i, grid, K, amp):
    u0 = fc.random_divfree(_seed(cfg, 24, i), grid, K, amp)
    f = ob.linear(fc.random_divfree(_seed(cfg, 25, i), grid, K))
    g = ob.linear(fc.random_divfree(_seed(cfg, 26, i), grid, K))
    return f, g, u0


def check_poisson_map(cfg: ExperimentConfig) -> SuiteResult:
    """Poisson property of the time-t Euler flow.

    The acceptance check runs on the band-truncated system (rhs re-truncated
    to ``|k|_inf <= band``); evolved differentials come from the discrete
    adjoint by default (``options.method = "basis"`` assembles them from the
    tangent-linear images of the band's Fourier basis instead).  A
    second, informational check evaluates the same tuples on the full
    dealiased grid with the discrete adjoint.
    """
    s = SuiteResult("poisson-map")
    m = cfg.option("tuples", 10, quick=3)
    K = cfg.option("band", 3)
    grid = Grid(cfg.option("n", 32), max(K, 4))
    dt = cfg.option("dt", 1e-3)
    t_end = cfg.option("t_end", 0.25)
    amp = cfg.option("amplitude", 1.0)
    method = cfg.option("method", "adjoint")
    dts = list(cfg.option("dts", [dt, dt / 2]))
    res = np.zeros((m, len(dts)))
    for i in range(m):
        f, g, u0 = _poisson_tuple(cfg, i, grid, K, amp)
        for j, h in enumerate(dts):
            spec = dy.IntegratorSpec(dt=h, t_end=t_end, band=K)
            res[i, j] = dy.poisson_map_check(f, g, u0, spec, K, method).normalized
    drops = res[:, :-1] / np.maximum(res[:, 1:], TINY)
    s.checks.append(upper("poisson_map.truncated_residual", float(res[:, 0].max()),
                          cfg.tol("poisson_map"), tuples=m, band=K, dt=dts[0], t=t_end,
                          method=method))
    s.checks.append(lower("poisson_map.truncated_dt_drop", float(drops.min()),
                          cfg.tol("poisson_map_drop"), tuples=m, band=K, dts=dts))
    worst = res.max(axis=0)
    s.tables.append(ConvergenceTable("poisson_map.truncated", "dt", dts, list(worst),
                                     fitted_order(dts, worst)))
    # full dealiased grid, same data
    gfull = Grid(cfg.option("full_n", 64))
    worst_f = 0.0
    for i in range(m):
        f, g, u0 = _poisson_tuple(cfg, i, gfull, K, cfg.option("full_amplitude", 0.5))
        r = dy.poisson_map_check(f, g, u0, dy.IntegratorSpec(dt=dt, t_end=t_end),
                                 method="adjoint")
        worst_f = max(worst_f, r.normalized)
    c = upper("poisson_map.full_grid_residual", worst_f, cfg.tol("poisson_map"),
              tuples=m, n=gfull.n, dt=dt, t=t_end)
    c.informational = True
    s.checks.append(c)
    return s


# ---------------------------------------------------------------------------
# oracle


def check_oracle(cfg: ExperimentConfig) -> SuiteResult:
    m = cfg.option("oracle_samples", 5, quick=2)
    grid = Grid(32, 4)
    tol = cfg.tol("oracle")
    adv = bgap = dgap = jac = 0.0
    for i in range(m):
        seed = _seed(cfg, 27, i)
        V, v, fo, fl = _oracle_pair(seed, 3, grid)
        X = orc.ModeSet(3).random(rng.derive_seed(seed, 9), mean=True)
        Xf = fc.VectorField.from_array(grid, orc.synthesize(X, grid.n))
        a1 = orc.synthesize(orc.oracle_advect(X, V), grid.n)
        a2 = ob.advect(Xf, v).data
        adv = max(adv, np.max(np.abs(a1 - a2)) / max(np.max(np.abs(a2)), TINY))
        for a, b in ((0, 1), (0, 2), (1, 3), (2, 3), (0, 3)):
            x = orc.oracle_bracket(fo[a], fo[b], V)
            y = br.bracket(fl[a], fl[b], v)
            sc = br.bracket_scale(v, ob.differential(fl[a], v), ob.differential(fl[b], v))
            bgap = max(bgap, abs(x - y) / sc)
            d1 = fc.VectorField.from_array(
                grid, orc.synthesize(orc.oracle_bracket_differential(fo[a], fo[b], V), grid.n))
            d2 = br.bracket_differential(fl[a], fl[b], v)
            dsc = sc / v.norm() * (grid.kmax / math.sqrt(AREA))
            dgap = max(dgap, (d1 - d2.as_vector()).norm() / dsc)
        for tri in ((0, 1, 3), (0, 2, 3), (1, 2, 3)):
            f, g, h = (fo[t] for t in tri)
            o = orc.oracle_jacobi(f, g, h, V)
            jac = max(jac, abs(o) / orc.oracle_scale(V, f.grad(V), g.grad(V), h.grad(V), kmax=3))
    s = SuiteResult("oracle")
    s.checks += [upper("oracle.advect", adv, tol, samples=m),
                 upper("oracle.bracket", bgap, tol, samples=m),
                 upper("oracle.bracket_differential", dgap, tol, samples=m),
                 upper("oracle.jacobi", jac, tol, samples=m)]
    return s


SUITES: dict[str, Callable[[ExperimentConfig], SuiteResult]] = {
    "hodge": check_hodge,
    "calculus": check_calculus,
    "bracket": check_bracket,
    "jacobi": check_jacobi,
    "reduction": check_reduction,
    "dynamics": check_dynamics,
    "commute": check_commute,
    "poisson-map": check_poisson_map,
    "oracle": check_oracle,
}


# ---------------------------------------------------------------------------
# Reports


def run_suite(name: str, cfg: ExperimentConfig) -> SuiteResult:
    """Run one suite; integration failures become a failing check with provenance."""
    if name not in SUITES:
        raise KeyError(f"unknown check {name!r}; choose from {sorted(SUITES)}")
    try:
        return SUITES[name](cfg)
    except dy.IntegrationError as exc:
        s = SuiteResult(name)
        s.checks.append(CheckResult(f"{name}.integration", math.nan, math.nan, False, "<=",
                                    {"module": exc.module, "step": exc.step, "error": str(exc)}))
        return s
    except gg.InversionError as exc:
        s = SuiteResult(name)
        s.checks.append(CheckResult(f"{name}.inversion", exc.residual, math.nan, False, "<=",
                                    {"module": "group.invert", "error": str(exc)}))
        return s


def versions() -> dict:
    import platform

    import scipy

    from . import __version__

    try:
        import finufft
        fv = getattr(finufft, "__version__", "unknown")
    except ImportError:  # pragma: no cover
        fv = None
    return {"liepoisson": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "finufft": fv}


def build_report(cfg: ExperimentConfig, suites: list, timings: dict) -> dict:
    """Machine-readable report; everything except ``timings`` is deterministic."""
    checks = sorted((c for s in suites for c in s.checks), key=lambda c: c.name)
    tables = sorted((t for s in suites for t in s.tables), key=lambda t: t.name)
    return {
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "pass": all(s.passed for s in suites),
        "suites": {s.name: s.passed for s in sorted(suites, key=lambda s: s.name)},
        "checks": [c.to_json() for c in checks],
        "convergence": [t.to_json() for t in tables],
        "config": cfg.to_dict(),
        "versions": versions(),
        "timings": timings,
    }
