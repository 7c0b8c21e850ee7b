"""Acceptance criteria, one test per criterion, at full desk-scale settings.

Tolerances are pinned here rather than read from the library defaults, so
a change of default cannot silently relax a criterion.
"""

import io
import json

import pytest

from liepoisson import checks, cli, config

_CACHE = {}


def suite(name):
    if name not in _CACHE:
        _CACHE[name] = checks.run_suite(name, config.from_dict({}))
    return {c.name: c for c in _CACHE[name].checks}


def expect(results, name, tol, comparator="<="):
    c = results[name]
    assert c.comparator == comparator
    ok = c.measured <= tol if comparator == "<=" else c.measured >= tol
    assert ok, f"{name}: measured {c.measured:.3e}, required {comparator} {tol:g} ({c.details})"


def test_hodge_suite():
    r = suite("hodge")
    assert r["hodge.idempotence"].details["samples"] == 200
    for name in ("hodge.idempotence", "hodge.orthogonality_divfree",
                 "hodge.orthogonality_parts", "hodge.reconstruction"):
        expect(r, name, 1e-11)


def test_calculus_suite():
    r = suite("calculus")
    for name in ("calculus.advection_antisymmetry", "calculus.second_differential_symmetry",
                 "calculus.b_adjointness"):
        assert r[name].details["samples"] == 100
        expect(r, name, 1e-11)


def test_bracket_consistency():
    r = suite("bracket")
    assert r["bracket.definition_vs_liealgebra"].details["samples"] == 100
    expect(r, "bracket.definition_vs_liealgebra", 1e-11)
    expect(r, "bracket.oracle_agreement", 1e-12)


def test_jacobi_identity():
    r = suite("jacobi")
    c = r["jacobi.normalized_cycle"]
    assert c.details["samples"] == 50 and c.details["kmax"] == c.details["n"] // 8
    expect(r, "jacobi.normalized_cycle", 1e-9)


def test_reduction_identity():
    r = suite("reduction")
    expect(r, "reduction.identity_gap", 1e-10)
    assert r["reduction.map_gap_finest"].details["maps"] == 10
    assert r["reduction.map_gap_finest"].details["n"] == 64
    expect(r, "reduction.map_gap_finest", 1e-6)
    assert r["reduction.refinement_order"].details["levels"] == [32, 48, 64]
    expect(r, "reduction.refinement_order", 2.0, ">=")
    expect(r, "reduction.right_invariance", 1e-8)


def test_dynamics_invariants():
    r = suite("dynamics")
    assert r["dynamics.taylor_green_steady"].details == {"n": 64, "dt": 1e-3, "t": 1.0}
    expect(r, "dynamics.taylor_green_steady", 1e-8)
    expect(r, "dynamics.energy_drift", 1e-8)
    expect(r, "dynamics.enstrophy_drift", 1e-8)
    expect(r, "dynamics.momentum", 1e-13)


def test_commutative_diagram():
    r = suite("commute")
    assert r["commute.taylor_green"].details == {"n": 64, "dt": 1e-3, "t": 0.5}
    expect(r, "commute.taylor_green", 1e-6)
    expect(r, "commute.dt_order", 3.5, ">=")


def test_poisson_flow_on_truncated_system():
    r = suite("poisson-map")
    c = r["poisson_map.truncated_residual"]
    assert c.details["tuples"] == 10 and c.details["band"] == 3
    assert c.details["dt"] == 1e-3 and c.details["t"] == 0.25
    expect(r, "poisson_map.truncated_residual", 1e-7)
    expect(r, "poisson_map.truncated_dt_drop", 8.0, ">=")


def test_reports_are_deterministic(tmp_path):
    reports = []
    for k in range(2):
        out = tmp_path / str(k)
        cli.main(["all", "--quick", "--seed", "0", "--output-dir", str(out)], io.StringIO())
        rep = json.loads((out / "report.json").read_text())
        rep.pop("timings")
        rep["config"].pop("output_dir")
        reports.append(json.dumps(rep, sort_keys=True))
    assert reports[0] == reports[1]
