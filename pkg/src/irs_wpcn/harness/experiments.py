"""Seeded Monte-Carlo sweeps.

Each (sweep point, realization) is one task; all schemes in a task share the
same channel draw and randomization seed. Tasks run in a process pool and
rows are merged by (point, realization, scheme) so the table does not
depend on scheduling or worker count.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

from ..baselines import SchemeId, run_scheme
from ..channel import realization_seed, sample_realization
from ..sdr import MAXMIN, Objective
from .config import ExperimentConfig

log = logging.getLogger(__name__)

SWEEP_VARIABLE = {"sweep_n": "n_elements", "sweep_d12": "d12", "rate_region": "omega"}


@dataclass(frozen=True)
class ResultRow:
    scheme: str
    sweep: str
    value: float
    realization: int
    seed: int
    status: str
    min_rate: float
    r1: float
    r2: float
    r_bar_star: float
    gap: float
    wall_time: float

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


ROW_FIELDS = tuple(f.name for f in fields(ResultRow))


@dataclass
class ResultTable:
    experiment: str
    rows: list

    @property
    def sweep_variable(self) -> str:
        return SWEEP_VARIABLE[self.experiment]

    @property
    def failures(self) -> int:
        return sum(not r.ok for r in self.rows)

    @property
    def failure_rate(self) -> float:
        return self.failures / len(self.rows) if self.rows else 0.0

    def values(self) -> list:
        return sorted({r.value for r in self.rows})

    def schemes(self) -> list:
        seen = []
        for r in self.rows:
            if r.scheme not in seen:
                seen.append(r.scheme)
        return seen

    def select(self, scheme: str, value=None, ok_only: bool = True) -> list:
        return [r for r in self.rows if r.scheme == scheme and (value is None or r.value == value)
                and (r.ok or not ok_only)]


def _points(config: ExperimentConfig, experiment: str) -> list:
    if experiment == "sweep_n":
        return [float(n) for n in config.n_grid]
    if experiment == "sweep_d12":
        return [float(d) for d in config.d12_grid]
    return [float(w) for w in config.omega_grid]


def _schemes(config: ExperimentConfig, experiment: str) -> tuple:
    return config.region_schemes if experiment == "rate_region" else config.schemes


def _run_task(config: ExperimentConfig, experiment: str, value: float, k: int) -> list:
    if experiment == "sweep_d12":
        geometry, n = config.geometry(d12=value), config.n_elements
    else:
        geometry = config.geometry()
        n = int(value) if experiment == "sweep_n" else config.n_elements
    objective = Objective(value) if experiment == "rate_region" else MAXMIN
    seed = realization_seed(config.seed, k)
    r = sample_realization(geometry, config.path_loss_model(), n, seed)
    params, settings = config.params(), config.settings()
    rows = []
    for scheme in _schemes(config, experiment):
        t0 = time.perf_counter()
        try:
            sol = run_scheme(SchemeId(scheme), r, params, settings, objective, config.trials, seed)
            status = sol.status
            vals = (sol.min_rate, sol.r1, sol.r2, sol.r_bar_star, sol.gap)
        except Exception as exc:  # recorded per row, never fatal to the sweep
            log.warning("%s %s=%g realization %d failed: %s", scheme, experiment, value, k, exc)
            status, vals = "error", (math.nan,) * 5
        wall = time.perf_counter() - t0
        rows.append(ResultRow(scheme, SWEEP_VARIABLE[experiment], value, k, seed, status,
                              *(float(v) for v in vals), wall))
    return rows


def _run_chunk(args):
    config, experiment, tasks = args
    return [row for value, k in tasks for row in _run_task(config, experiment, value, k)]


def run_experiment(config: ExperimentConfig, experiment: str) -> ResultTable:
    tasks = [(v, k) for v in _points(config, experiment) for k in range(config.realizations)]
    if config.workers == 1:
        rows = _run_chunk((config, experiment, tasks))
    else:
        chunks = [tasks[i::config.workers * 4] for i in range(config.workers * 4)]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = pool.map(_run_chunk, [(config, experiment, c) for c in chunks if c])
            rows = [row for part in parts for row in part]
    order = {s: i for i, s in enumerate(_schemes(config, experiment))}
    rows.sort(key=lambda r: (r.value, r.realization, order[r.scheme]))
    return ResultTable(experiment, rows)


def run_sweep_n(config: ExperimentConfig) -> ResultTable:
    return run_experiment(config, "sweep_n")


def run_sweep_d12(config: ExperimentConfig) -> ResultTable:
    return run_experiment(config, "sweep_d12")


def run_rate_region(config: ExperimentConfig) -> ResultTable:
    return run_experiment(config, "rate_region")
