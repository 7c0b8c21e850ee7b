"""Command-line front end.

::

    liepoisson simulate --config c.json
    liepoisson check jacobi [--config c.json] [--quick]
    liepoisson convergence --check reduction --levels 32,48,64
    liepoisson all --quick

Exit codes: 0 when every check passes, 1 when any fails, 2 for usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import checks
from . import config as cf
from . import dynamics as dy
from . import fields as fc
from . import group as gg
from . import observables as ob

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# option each convergence study refines, and how to parse a level
CONVERGENCE = {
    "reduction": ("levels", int),
    "commute": ("order_dts", float),
    "poisson-map": ("dts", float),
}


def _load(args) -> cf.ExperimentConfig:
    cfg = cf.load(args.config) if args.config else cf.from_dict({})
    if getattr(args, "quick", False):
        cfg = replace(cfg, quick=True)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.output_dir is not None:
        cfg = replace(cfg, output_dir=args.output_dir)
    return cf.validate(cfg)


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _print_checks(report: dict, out) -> None:
    for c in report["checks"]:
        status = "PASS" if c["pass"] else "FAIL"
        if c["informational"]:
            status = "info"
        print(f"{status:4}  {c['name']:<42} {c['measured']!s:>24} {c['comparator']} {c['tolerance']}",
              file=out)
    for t in report["convergence"]:
        print(f"table {t['name']} ({t['parameter']}), fitted order {t['fitted_order']}", file=out)
        for r in t["rows"]:
            print(f"    {r['level']!s:>10}  {r['residual']!s}", file=out)


def _run(cfg, names, report_name, out) -> int:
    suites, timings = [], {}
    for name in names:
        t0 = time.perf_counter()
        suites.append(checks.run_suite(name, cfg))
        timings[name] = round(time.perf_counter() - t0, 3)
    report = checks.build_report(cfg, suites, timings)
    path = Path(cfg.output_dir) / report_name
    _write_json(path, report)
    _print_checks(report, out)
    print(f"{'PASS' if report['pass'] else 'FAIL'}; report written to {path}", file=out)
    return EXIT_PASS if report["pass"] else EXIT_FAIL


def cmd_check(args, out) -> int:
    cfg = _load(args)
    return _run(cfg, [args.suite], f"report_{args.suite}.json", out)


def cmd_all(args, out) -> int:
    cfg = _load(args)
    return _run(cfg, list(cf.CHECKS), "report.json", out)


def cmd_convergence(args, out) -> int:
    cfg = _load(args)
    key, conv = CONVERGENCE[args.check]
    try:
        levels = [conv(x) for x in args.levels.split(",") if x.strip()]
    except ValueError:
        print(f"error: --levels must be a comma-separated list of numbers", file=sys.stderr)
        return EXIT_USAGE
    if len(levels) < 2:
        print("error: --levels needs at least two values", file=sys.stderr)
        return EXIT_USAGE
    if args.check == "reduction":
        for n in levels:
            cf.validate(replace(cfg, grid=cf.GridConfig(n=n)))
    cfg = replace(cfg, options={**cfg.options, key: levels})
    return _run(cfg, [args.check], f"convergence_{args.check}.json", out)


def _initial_field(cfg, grid) -> fc.DivFreeField:
    kind = cfg.option("initial", "taylor_green")
    amp = float(cfg.option("amplitude", 1.0))
    if kind == "taylor_green":
        return fc.taylor_green(grid, amp)
    if kind == "random":
        return fc.random_divfree(cfg.seed, grid, int(cfg.option("initial_kmax", grid.kmax)), amp)
    raise cf.ConfigError(f"options.initial must be 'taylor_green' or 'random', got {kind!r}")


def cmd_simulate(args, out) -> int:
    cfg = _load(args)
    grid = fc.Grid(cfg.grid.n, cfg.grid.kmax)
    it = cfg.integrator
    rep = cfg.option("representation", "eulerian")
    if rep not in ("eulerian", "lagrangian", "both"):
        raise cf.ConfigError(f"options.representation must be eulerian|lagrangian|both, got {rep!r}")
    spec = dy.IntegratorSpec(dt=it.dt, t_end=it.t_end,
                             reproject_every=cfg.option("reproject_every"),
                             band=cfg.option("band"))
    u0 = _initial_field(cfg, grid)
    obs = [ob.from_config(o, grid) for o in cfg.observables]
    outdir = Path(cfg.output_dir) / cfg.experiment
    outdir.mkdir(parents=True, exist_ok=True)
    every = int(cfg.option("snapshot_every", 0) or 0)
    obs_rows = []

    def snap(step, t, u, p=None):
        if obs:
            obs_rows.append([t] + [ob.value(f, u) for f in obs])
        if every and step % every == 0 or step == 0:
            fc.write_field(outdir / f"u_{step:06d}.vfield", u)
            if p is not None:
                gg.write_flowmap(outdir / f"eta_{step:06d}.vmap", p.eta)

    summary = {"experiment": cfg.experiment, "representation": rep, "steps": len(spec.steps())}
    try:
        if rep == "eulerian":
            counter = iter(range(1, 10**9))
            snap(0, 0.0, u0)
            state, series = dy.evolve_eulerian(
                u0, spec, on_step=lambda t, u: snap(next(counter), t, u))
            fc.write_field(outdir / "u_final.vfield", state.u)
        elif rep == "lagrangian":
            counter = iter(range(1, 10**9))
            p0 = gg.TangentPoint.at_identity(u0)
            snap(0, 0.0, u0, p0)
            state, series = dy.evolve_lagrangian(
                p0, spec, on_step=lambda t, p: snap(next(counter), t, p.u, p))
            fc.write_field(outdir / "u_final.vfield", state.p.u)
            gg.write_flowmap(outdir / "eta_final.vmap", state.p.eta)
        else:
            series = dy.commutation_residual(u0, spec)
            summary["max_commutation_residual"] = float(np.nanmax(
                series.column("commutation_residual")))
    except dy.IntegrationError as exc:
        _write_json(outdir / "summary.json", {**summary, "error": str(exc),
                                              "module": exc.module, "step": exc.step})
        print(f"FAIL: {exc} (module {exc.module}, step {exc.step})", file=out)
        return EXIT_FAIL
    series.to_csv(outdir / "series.csv")
    if obs_rows:
        header = ["t"] + [f"{o['kind']}_{i}" for i, o in enumerate(cfg.observables)]
        lines = [",".join(header)] + [",".join(repr(float(x)) for x in r) for r in obs_rows]
        (outdir / "observables.csv").write_text("\n".join(lines) + "\n")
    summary["energy_relative_drift"] = series.relative_drift("energy")
    if rep == "eulerian":
        summary["enstrophy_relative_drift"] = series.relative_drift("enstrophy")
    if rep != "eulerian":
        summary["max_vol_drift"] = float(np.nanmax(series.column("vol_drift")))
    summary["warnings"] = series.warnings
    _write_json(outdir / "summary.json", summary)
    for k, v in summary.items():
        print(f"{k}: {v}", file=out)
    print(f"output written to {outdir}", file=out)
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="liepoisson", description=__doc__.split("\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (JSON)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--output-dir", help="override the output directory")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="integrate and write series and snapshots")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("check", parents=[common], help="run one verification suite")
    c.add_argument("suite", choices=cf.CHECKS)
    c.add_argument("--quick", action="store_true", help="reduced sample counts and run lengths")
    c.set_defaults(func=cmd_check)

    v = sub.add_parser("convergence", parents=[common], help="refinement table with fitted order")
    v.add_argument("--check", required=True, choices=sorted(CONVERGENCE))
    v.add_argument("--levels", required=True,
                   help="comma-separated grid sizes (reduction) or time steps")
    v.add_argument("--quick", action="store_true")
    v.set_defaults(func=cmd_convergence)

    a = sub.add_parser("all", parents=[common], help="run every suite")
    a.add_argument("--quick", action="store_true")
    a.set_defaults(func=cmd_all)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except cf.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
