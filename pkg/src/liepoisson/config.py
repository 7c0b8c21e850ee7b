"""Experiment configuration: JSON in, validated frozen dataclass out."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

ENV_OUTPUT_DIR = "LIEPOISSON_OUTPUT_DIR"
ENV_THREADS = "LIEPOISSON_THREADS"

CHECKS = ("hodge", "calculus", "bracket", "jacobi", "reduction", "dynamics",
          "commute", "poisson-map", "oracle")

# Acceptance tolerances; every one can be overridden under "tolerances".
DEFAULT_TOLERANCES = {
    "hodge": 1e-11,
    "calculus": 1e-11,
    "bracket": 1e-11,
    "bracket_oracle": 1e-12,
    "derivation": 1e-11,
    "casimir": 1e-10,
    "jacobi": 1e-9,
    "reduction_identity": 1e-10,
    "reduction_maps": 1e-6,
    "reduction_order": 2.0,
    "right_invariance": 1e-8,
    "taylor_green_steady": 1e-8,
    "energy_drift": 1e-8,
    "enstrophy_drift": 1e-8,
    "momentum": 1e-13,
    "commute_taylor_green": 1e-6,
    "commute_order": 3.5,
    "volume_drift": 1e-6,
    "poisson_map": 1e-7,
    "poisson_map_drop": 8.0,
    "oracle": 1e-12,
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the violated constraint."""


@dataclass(frozen=True)
class GridConfig:
    n: int = 64
    kmax: int | None = None


@dataclass(frozen=True)
class IntegratorConfig:
    scheme: str = "rk4"
    dt: float = 1e-3
    t_end: float = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a run.

    ``options`` carries suite-specific knobs (sample counts, dt levels,
    initial conditions); ``quick`` shrinks sample counts and run lengths.
    """

    experiment: str = "default"
    grid: GridConfig = field(default_factory=GridConfig)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    seed: int = 0
    observables: tuple = ()
    tolerances: dict = field(default_factory=dict)
    interpolation: str = "spectral"
    output_dir: str = "out"
    quick: bool = False
    options: dict = field(default_factory=dict)

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def option(self, name: str, default: Any = None, quick: Any = None) -> Any:
        if name in self.options:
            return self.options[name]
        if self.quick and quick is not None:
            return quick
        return default

    def to_dict(self) -> dict:
        d = asdict(self)
        d["observables"] = list(self.observables)
        return d


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    """Check every cross-module constraint before any compute."""
    n, kmax = cfg.grid.n, cfg.grid.kmax
    if not isinstance(n, int) or n < 16 or n % 8:
        raise ConfigError(f"grid.n must be an integer multiple of 8 and >= 16, got {n!r}")
    if kmax is not None and not (isinstance(kmax, int) and 1 <= kmax <= n // 8):
        raise ConfigError(f"grid.kmax must satisfy 1 <= kmax <= n/8 = {n // 8}, got {kmax!r}")
    it = cfg.integrator
    if it.scheme != "rk4":
        raise ConfigError(f"integrator.scheme must be 'rk4', got {it.scheme!r}")
    if not (isinstance(it.dt, (int, float)) and it.dt > 0):
        raise ConfigError(f"integrator.dt must be > 0, got {it.dt!r}")
    if not (isinstance(it.t_end, (int, float)) and it.t_end >= 0):
        raise ConfigError(f"integrator.t_end must be >= 0, got {it.t_end!r}")
    if cfg.interpolation not in ("spectral", "bicubic"):
        raise ConfigError(f"interpolation must be 'spectral' or 'bicubic', got {cfg.interpolation!r}")
    if not isinstance(cfg.seed, int) or cfg.seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {cfg.seed!r}")
    for name, val in cfg.tolerances.items():
        if name not in DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown tolerance {name!r}")
        if not isinstance(val, (int, float)) or val <= 0:
            raise ConfigError(f"tolerance {name!r} must be a positive number")
    for obs in cfg.observables:
        if not isinstance(obs, dict) or "kind" not in obs:
            raise ConfigError("each observable must be an object with a 'kind'")
        if obs["kind"] not in ("energy", "enstrophy", "linear", "mode_moment"):
            raise ConfigError(f"unknown observable kind {obs['kind']!r}")
        if obs["kind"] == "linear" and int(obs.get("kmax", 1)) > (kmax or n // 8):
            raise ConfigError("linear observable kmax exceeds grid.kmax")
    return cfg


_TOP_KEYS = {"experiment", "grid", "integrator", "seed", "observables", "tolerances",
             "interpolation", "output_dir", "quick", "options"}


def from_dict(d: dict) -> ExperimentConfig:
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    extra = set(d) - _TOP_KEYS
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    try:
        grid = GridConfig(**d.get("grid", {}))
        integ = IntegratorConfig(**d.get("integrator", {}))
    except TypeError as exc:
        raise ConfigError(f"bad grid/integrator section: {exc}") from None
    cfg = ExperimentConfig(
        experiment=str(d.get("experiment", "default")),
        grid=grid,
        integrator=integ,
        seed=d.get("seed", 0),
        observables=tuple(d.get("observables", ())),
        tolerances=dict(d.get("tolerances", {})),
        interpolation=d.get("interpolation", "spectral"),
        output_dir=str(d.get("output_dir", "out")),
        quick=bool(d.get("quick", False)),
        options=dict(d.get("options", {})),
    )
    return validate(apply_env(cfg))


def apply_env(cfg: ExperimentConfig) -> ExperimentConfig:
    """Environment overrides: output directory and NUFFT thread count."""
    out = os.environ.get(ENV_OUTPUT_DIR)
    if out:
        cfg = replace(cfg, output_dir=out)
    threads = os.environ.get(ENV_THREADS)
    if threads:
        from . import fields

        try:
            fields.NUFFT_THREADS = max(1, int(threads))
        except ValueError:
            raise ConfigError(f"{ENV_THREADS} must be an integer, got {threads!r}") from None
    return cfg


def load(path) -> ExperimentConfig:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return from_dict(d)
