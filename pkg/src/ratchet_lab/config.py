"""Experiment configuration: JSON schema, validation, and overrides."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .fokker_planck import RatchetSchedule
from .potential import RatchetPotential

__all__ = ["ConfigError", "ExperimentConfig"]


class ConfigError(ValueError):
    """Invalid configuration; carries the offending field path."""

    def __init__(self, field_path: str, message: str):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}")


_DEFAULTS = {
    "potential": {"k": 2, "a": 0.2, "V0": 1.0},
    "schedule": {"sigma": 0.05, "t_tr": 4.0, "t_diff": 10.0},
    "grid": {"n": 1024, "dt": None},
    "solver": {"tol": 1e-9, "max_cycles": 10_000},
    "sweep": {
        "count": 7,
        "t_tr0": 2.0, "t_tr_factor": 1.5,
        "tau0": 0.3, "tau_step": 0.1,
        "sigma0": 0.1, "sigma_factor": 0.7,
    },
}


def _require(cond: bool, path: str, message: str):
    if not cond:
        raise ConfigError(path, message)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated run parameters for every subcommand."""

    potential: dict = field(default_factory=lambda: dict(_DEFAULTS["potential"]))
    schedule: dict = field(default_factory=lambda: dict(_DEFAULTS["schedule"]))
    grid: dict = field(default_factory=lambda: dict(_DEFAULTS["grid"]))
    solver: dict = field(default_factory=lambda: dict(_DEFAULTS["solver"]))
    sweep: dict = field(default_factory=lambda: dict(_DEFAULTS["sweep"]))

    # -- construction ---------------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        merged = {}
        for section, defaults in _DEFAULTS.items():
            merged[section] = dict(defaults)
            extra = data.get(section, {})
            if not isinstance(extra, dict):
                raise ConfigError(section, "must be a JSON object")
            unknown = set(extra) - set(defaults)
            _require(not unknown, section, f"unknown fields {sorted(unknown)}")
            merged[section].update(extra)
        unknown = set(data) - set(_DEFAULTS)
        _require(not unknown, "config", f"unknown sections {sorted(unknown)}")
        cfg = cls(**merged)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def with_overrides(self, overrides: dict) -> "ExperimentConfig":
        """Apply dotted-path overrides like {"potential.a": 0.1} (flags win)."""
        data = self.to_dict()
        for path, value in overrides.items():
            section, _, name = path.partition(".")
            if section not in data or name not in data[section]:
                raise ConfigError(path, "unknown override target")
            data[section][name] = value
        return ExperimentConfig.from_dict(data)

    # -- validation -----------------------------------------------------------

    def validate(self):
        k, a, v0 = self.potential["k"], self.potential["a"], self.potential["V0"]
        _require(isinstance(k, int) and k >= 2, "potential.k", f"must be an integer >= 2, got {k!r}")
        _require(0.0 < a < 1.0 / k, "potential.a", f"must lie in (0, 1/k) = (0, {1.0 / k}), got {a!r}")
        _require(v0 > 0.0, "potential.V0", f"must be positive, got {v0!r}")

        sig = self.schedule["sigma"]
        t_tr, t_diff = self.schedule["t_tr"], self.schedule["t_diff"]
        _require(sig > 0.0, "schedule.sigma", f"must be positive, got {sig!r}")
        _require(t_tr >= 0.0, "schedule.t_tr", f"must be nonnegative, got {t_tr!r}")
        _require(t_diff >= 0.0, "schedule.t_diff", f"must be nonnegative, got {t_diff!r}")
        _require(t_tr + t_diff > 0.0, "schedule", "period t_tr + t_diff must be positive")

        n, dt = self.grid["n"], self.grid["dt"]
        _require(isinstance(n, int) and n >= 8, "grid.n", f"must be an integer >= 8, got {n!r}")
        _require(n % k == 0, "grid.n", f"must be divisible by potential.k = {k}, got {n}")
        _require(dt is None or dt > 0.0, "grid.dt", f"must be positive or null, got {dt!r}")

        tol, mc = self.solver["tol"], self.solver["max_cycles"]
        _require(tol > 0.0, "solver.tol", f"must be positive, got {tol!r}")
        _require(isinstance(mc, int) and mc >= 1, "solver.max_cycles",
                 f"must be a positive integer, got {mc!r}")

        sw = self.sweep
        _require(isinstance(sw["count"], int) and sw["count"] >= 1, "sweep.count",
                 f"must be a positive integer, got {sw['count']!r}")
        for name in ("t_tr0", "t_tr_factor", "tau0", "tau_step", "sigma0", "sigma_factor"):
            _require(sw[name] > 0.0, f"sweep.{name}", f"must be positive, got {sw[name]!r}")

    # -- realization ----------------------------------------------------------

    def make_potential(self) -> RatchetPotential:
        return RatchetPotential(k=self.potential["k"], a=self.potential["a"],
                                v0=self.potential["V0"])

    def make_schedule(self) -> RatchetSchedule:
        return RatchetSchedule(sigma=self.schedule["sigma"],
                               t_tr=self.schedule["t_tr"],
                               t_diff=self.schedule["t_diff"])

    def ladder(self):
        sw = self.sweep
        return [
            (i,
             sw["t_tr0"] * sw["t_tr_factor"] ** i,
             sw["tau0"] + sw["tau_step"] * i,
             sw["sigma0"] * sw["sigma_factor"] ** i)
            for i in range(sw["count"])
        ]

    def to_dict(self) -> dict:
        return {
            "potential": dict(self.potential),
            "schedule": dict(self.schedule),
            "grid": dict(self.grid),
            "solver": dict(self.solver),
            "sweep": dict(self.sweep),
        }
