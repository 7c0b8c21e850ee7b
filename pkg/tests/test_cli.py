import io
import json

import pytest

from liepoisson import cli


def run(argv):
    out = io.StringIO()
    code = cli.main(argv, out)
    return code, out.getvalue()


def test_check_passes_and_writes_report(tmp_path):
    code, text = run(["check", "hodge", "--quick", "--output-dir", str(tmp_path)])
    assert code == 0
    rep = json.loads((tmp_path / "report_hodge.json").read_text())
    assert rep["pass"] is True
    names = [c["name"] for c in rep["checks"]]
    assert names == sorted(names)
    assert {"name", "measured", "tolerance", "pass"} <= set(rep["checks"][0])
    assert "PASS" in text


def test_failing_check_exits_one(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"tolerances": {"hodge": 1e-30}, "quick": True}))
    code, _ = run(["check", "hodge", "--config", str(cfg), "--output-dir", str(tmp_path)])
    assert code == 1


def test_bad_config_exits_two(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"grid": {"n": 20}}))
    assert run(["check", "jacobi", "--config", str(cfg)])[0] == 2
    assert "multiple of 8" in capsys.readouterr().err


def test_usage_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        cli.main(["check", "nonexistent"])
    assert exc.value.code == 2
    assert run(["convergence", "--check", "commute", "--levels", "0.1"])[0] == 2
    assert run(["convergence", "--check", "commute", "--levels", "a,b"])[0] == 2


def test_convergence_table(tmp_path):
    code, text = run(["convergence", "--check", "reduction", "--levels", "32,48,64", "--quick",
                      "--output-dir", str(tmp_path)])
    rep = json.loads((tmp_path / "convergence_reduction.json").read_text())
    t = rep["convergence"][0]
    assert [r["level"] for r in t["rows"]] == [32, 48, 64]
    assert t["fitted_order"] >= 2
    assert code == 0


def test_simulate_taylor_green(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "experiment": "tg", "grid": {"n": 32}, "integrator": {"dt": 0.01, "t_end": 0.1},
        "observables": [{"kind": "energy"}], "options": {"snapshot_every": 5},
        "output_dir": str(tmp_path)}))
    code, _ = run(["simulate", "--config", str(cfg)])
    assert code == 0
    d = tmp_path / "tg"
    rows = (d / "series.csv").read_text().splitlines()
    energies = [float(r.split(",")[1]) for r in rows[1:]]
    assert max(abs(e - energies[0]) for e in energies) <= 1e-8 * energies[0]
    assert (d / "u_000005.vfield").exists() and (d / "u_final.vfield").exists()
    assert len((d / "observables.csv").read_text().splitlines()) == 12


def test_simulate_lagrangian_writes_maps(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "experiment": "lag", "grid": {"n": 32}, "integrator": {"dt": 0.05, "t_end": 0.1},
        "options": {"representation": "lagrangian", "initial": "random", "amplitude": 0.3},
        "output_dir": str(tmp_path)}))
    assert run(["simulate", "--config", str(cfg)])[0] == 0
    assert (tmp_path / "lag" / "eta_final.vmap").read_text().startswith("VMAP2 v1 n=32")
    summary = json.loads((tmp_path / "lag" / "summary.json").read_text())
    assert summary["max_vol_drift"] < 1e-6


def test_simulate_rejects_unknown_initial(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"grid": {"n": 32}, "options": {"initial": "vortex"},
                               "output_dir": str(tmp_path)}))
    assert run(["simulate", "--config", str(cfg)])[0] == 2
