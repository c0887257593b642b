"""Experiment configuration (YAML document, every key optional).

Schema and defaults::

    geometry:
      hap: [0.0, 0.0]
      d1: 8.0              # HAP-WD1 distance, WD1 at (d1, 0)
      d2: 5.0              # HAP-WD2 distance, WD2 at (d2, 0)
      irs: null            # [x, y]; null places the IRS 2 m above WD2
    path_loss:
      c0_db: 30.0
      d0: 1.0
      exponents: {hap_irs: 2.0, irs_wd: 2.2, hap_wd: 3.0, wd_wd: 3.0}
    system: {p_hap_dbm: 30.0, eta: 0.8, n0_dbm: -80.0}
    experiments: [sweep_n, sweep_d12, rate_region]
    n_elements: 20         # N for the d12 sweep and the rate region
    n_grid: [10, 20, 30, 40, 50]
    d12_grid: [2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0]
    omega_grid: [0.0, 0.05, ..., 1.0]
    schemes: [CoopWithIrs, IndepWithIrs, CoopNoIrs, IndepNoIrs]
    region_schemes: [CoopWithIrs, IndepWithIrs, IndepNoIrs]
    realizations: 100
    seed: 2020
    trials: 500            # Gaussian randomization draws
    solver: {feasibility_tol: 1.0e-7, objective_tol: 1.0e-6, max_rounds: 80, method: auto}
    workers: 1
    failure_threshold: 0.05
    record_timing: false   # adds a wall_time column (breaks byte-identical reruns)
    output_dir: results

In the d12 sweep WD1 stays at (d1, 0) and WD2 moves to (d1 - d12, 0); with
``irs: null`` the IRS follows WD2.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from ..baselines import SchemeId
from ..channel import LinkClass, PathLossModel, ScenarioGeometry
from ..engine import SolverSettings
from ..rates import SystemParams

EXPERIMENTS = ("sweep_n", "sweep_d12", "rate_region")


class ConfigError(ValueError):
    """Invalid or unreadable configuration."""


def _grid(lo, hi, step):
    return [round(float(x), 10) for x in np.arange(lo, hi + step / 2, step)]


@dataclass(frozen=True)
class ExperimentConfig:
    hap: tuple = (0.0, 0.0)
    d1: float = 8.0
    d2: float = 5.0
    irs: tuple | None = None
    c0_db: float = 30.0
    d0: float = 1.0
    exponents: dict = field(default_factory=lambda: {"hap_irs": 2.0, "irs_wd": 2.2,
                                                     "hap_wd": 3.0, "wd_wd": 3.0})
    p_hap_dbm: float = 30.0
    eta: float = 0.8
    n0_dbm: float = -80.0
    experiments: tuple = EXPERIMENTS
    n_elements: int = 20
    n_grid: tuple = (10, 20, 30, 40, 50)
    d12_grid: tuple = tuple(_grid(2.0, 5.0, 0.5))
    omega_grid: tuple = tuple(_grid(0.0, 1.0, 0.05))
    schemes: tuple = tuple(s.value for s in SchemeId)
    region_schemes: tuple = ("CoopWithIrs", "IndepWithIrs", "IndepNoIrs")
    realizations: int = 100
    seed: int = 2020
    trials: int = 500
    feasibility_tol: float = 1e-7
    objective_tol: float = 1e-6
    max_rounds: int = 80
    method: str = "auto"
    workers: int = 1
    failure_threshold: float = 0.05
    record_timing: bool = False
    output_dir: str = "results"

    def __post_init__(self):
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for name in ("n_grid", "d12_grid", "omega_grid", "schemes", "experiments"):
            if len(getattr(self, name)) == 0:
                raise ConfigError(f"{name} must be nonempty")
        if any(int(n) != n or n < 0 for n in self.n_grid) or self.n_elements < 0:
            raise ConfigError("element counts must be non-negative integers")
        if any(not 0.0 <= w <= 1.0 for w in self.omega_grid):
            raise ConfigError("omega_grid must lie in [0, 1]")
        if any(not 0.0 < d < self.d1 for d in self.d12_grid):
            raise ConfigError("d12_grid values must lie in (0, d1)")
        for s in tuple(self.schemes) + tuple(self.region_schemes):
            try:
                SchemeId(s)
            except ValueError:
                raise ConfigError(f"unknown scheme {s!r}") from None
        for e in self.experiments:
            if e not in EXPERIMENTS:
                raise ConfigError(f"unknown experiment {e!r}")
        if not 0.0 <= self.failure_threshold <= 1.0:
            raise ConfigError("failure_threshold must lie in [0, 1]")
        try:
            self.geometry()
            self.path_loss_model()
            self.params()
            self.settings()
        except (ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc

    def geometry(self, d12: float | None = None) -> ScenarioGeometry:
        d2 = self.d2 if d12 is None else self.d1 - d12
        g = ScenarioGeometry.collinear(self.d1, d2, irs=self.irs)
        if tuple(self.hap) != (0.0, 0.0):
            h = np.asarray(self.hap, dtype=float)
            g = ScenarioGeometry(tuple(h), tuple(h + g.wd1_position), tuple(h + g.wd2_position),
                                 tuple(h + g.irs_position))
        return g

    def path_loss_model(self) -> PathLossModel:
        return PathLossModel(self.c0_db, self.d0, {LinkClass(k): v for k, v in self.exponents.items()})

    def params(self) -> SystemParams:
        return SystemParams.from_dbm(self.p_hap_dbm, self.eta, self.n0_dbm)

    def settings(self) -> SolverSettings:
        return SolverSettings(feasibility_tol=self.feasibility_tol,
                              objective_tol=self.objective_tol, max_rounds=self.max_rounds,
                              method=self.method)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        """Nested document in the file schema; ``load`` of it round-trips."""
        return {
            "geometry": {"hap": list(self.hap), "d1": self.d1, "d2": self.d2,
                         "irs": None if self.irs is None else list(self.irs)},
            "path_loss": {"c0_db": self.c0_db, "d0": self.d0, "exponents": dict(self.exponents)},
            "system": {"p_hap_dbm": self.p_hap_dbm, "eta": self.eta, "n0_dbm": self.n0_dbm},
            "experiments": list(self.experiments),
            "n_elements": self.n_elements,
            "n_grid": list(self.n_grid),
            "d12_grid": list(self.d12_grid),
            "omega_grid": list(self.omega_grid),
            "schemes": list(self.schemes),
            "region_schemes": list(self.region_schemes),
            "realizations": self.realizations,
            "seed": self.seed,
            "trials": self.trials,
            "solver": {"feasibility_tol": self.feasibility_tol,
                       "objective_tol": self.objective_tol, "max_rounds": self.max_rounds,
                       "method": self.method},
            "workers": self.workers,
            "failure_threshold": self.failure_threshold,
            "record_timing": self.record_timing,
            "output_dir": self.output_dir,
        }


_SECTIONS = {
    "geometry": {"hap", "d1", "d2", "irs"},
    "path_loss": {"c0_db", "d0", "exponents"},
    "system": {"p_hap_dbm", "eta", "n0_dbm"},
    "solver": {"feasibility_tol", "objective_tol", "max_rounds", "method"},
}
_TUPLES = {"hap", "irs", "experiments", "n_grid", "d12_grid", "omega_grid", "schemes",
           "region_schemes"}


def from_dict(doc: dict | None) -> ExperimentConfig:
    doc = dict(doc or {})
    flat = {}
    for key, value in doc.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"section {key!r} must be a mapping")
            unknown = set(value) - _SECTIONS[key]
            if unknown:
                raise ConfigError(f"unknown keys in {key!r}: {sorted(unknown)}")
            flat.update(value)
        else:
            flat[key] = value
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(flat) - names
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in _TUPLES & set(flat):
        if flat[key] is not None:
            if isinstance(flat[key], (str, int, float)):
                flat[key] = [flat[key]]
            flat[key] = tuple(flat[key])
    if "exponents" in flat:
        merged = ExperimentConfig().exponents
        merged.update(flat["exponents"] or {})
        flat["exponents"] = merged
    try:
        return ExperimentConfig(**flat)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if doc is not None and not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a mapping")
    return from_dict(doc)
