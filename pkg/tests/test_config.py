import json

import pytest

from liepoisson import config as cf
from liepoisson import fields


def test_defaults_validate():
    cfg = cf.from_dict({})
    assert cfg.grid.n == 64 and cfg.tol("jacobi") == 1e-9


@pytest.mark.parametrize("d,msg", [
    ({"grid": {"n": 60}}, "multiple of 8"),
    ({"grid": {"n": 32, "kmax": 5}}, "kmax"),
    ({"integrator": {"dt": -1}}, "dt"),
    ({"integrator": {"scheme": "euler"}}, "scheme"),
    ({"interpolation": "linear"}, "interpolation"),
    ({"seed": -3}, "seed"),
    ({"tolerances": {"nonsense": 1.0}}, "unknown tolerance"),
    ({"tolerances": {"jacobi": 0}}, "positive"),
    ({"observables": [{"kind": "helicity"}]}, "observable"),
    ({"bogus": 1}, "unknown config keys"),
    ({"grid": {"size": 32}}, "grid"),
])
def test_invalid_configs_name_the_constraint(d, msg):
    with pytest.raises(cf.ConfigError, match=msg):
        cf.from_dict(d)


def test_tolerance_override_and_options():
    cfg = cf.from_dict({"tolerances": {"jacobi": 1e-6}, "options": {"samples": 3}, "quick": True})
    assert cfg.tol("jacobi") == 1e-6
    assert cfg.option("samples", 50, quick=10) == 3
    assert cfg.option("tuples", 10, quick=2) == 2


def test_env_overrides(monkeypatch):
    monkeypatch.setenv(cf.ENV_OUTPUT_DIR, "/tmp/elsewhere")
    monkeypatch.setenv(cf.ENV_THREADS, "1")
    assert cf.from_dict({}).output_dir == "/tmp/elsewhere"
    assert fields.NUFFT_THREADS == 1
    monkeypatch.setenv(cf.ENV_THREADS, "many")
    with pytest.raises(cf.ConfigError):
        cf.from_dict({})


def test_load(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"experiment": "x", "grid": {"n": 32}}))
    assert cf.load(p).experiment == "x"
    p.write_text("{not json")
    with pytest.raises(cf.ConfigError):
        cf.load(p)
