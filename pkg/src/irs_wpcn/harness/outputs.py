"""CSV, manifest and plot-script emission."""

from __future__ import annotations

import csv
import json
import math
import platform
from pathlib import Path

import numpy as np

from .. import __version__
from . import stats
from .config import ExperimentConfig
from .experiments import ROW_FIELDS, SWEEP_VARIABLE, ResultRow, ResultTable
from .plotting import FIGURES, render_figures

CSV_NAMES = {"sweep_n": "sweep_n.csv", "sweep_d12": "sweep_d12.csv",
             "rate_region": "rate_region.csv"}
MANIFEST = "manifest.json"
PLOT_SCRIPT = "plot_figures.py"

_INT_FIELDS = {"realization", "seed"}
_STR_FIELDS = {"scheme", "sweep", "status"}


def csv_fields(record_timing: bool = False) -> tuple:
    return ROW_FIELDS if record_timing else tuple(f for f in ROW_FIELDS if f != "wall_time")


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(table: ResultTable, path, record_timing: bool = False) -> Path:
    path = Path(path)
    cols = csv_fields(record_timing)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in table.rows:
            w.writerow([_fmt(getattr(row, c)) for c in cols])
    return path


def read_csv(path, experiment: str | None = None) -> ResultTable:
    path = Path(path)
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            vals = {}
            for f in ROW_FIELDS:
                raw = rec.get(f)
                if f in _STR_FIELDS:
                    vals[f] = raw
                elif f in _INT_FIELDS:
                    vals[f] = int(raw)
                else:
                    vals[f] = float(raw) if raw is not None else math.nan
            rows.append(ResultRow(**vals))
    if experiment is None:
        inverse = {v: k for k, v in SWEEP_VARIABLE.items()}
        experiment = inverse[rows[0].sweep] if rows else "sweep_n"
    return ResultTable(experiment, rows)


def _clean(x):
    """JSON-safe copy: NaN/inf become null, numpy scalars become Python floats."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_clean(v) for v in x]
    if isinstance(x, (float, np.floating)):
        return float(x) if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    return x


def summarize(table: ResultTable) -> dict:
    ps, ss = stats.point_stats(table), stats.scheme_stats(table)
    out = {
        "sweep_variable": table.sweep_variable,
        "values": table.values(),
        "rows": len(table.rows),
        "failures": table.failures,
        "failure_rate": table.failure_rate,
        "min_rate": {s: {"overall": ss[s], "by_value": [ps[s][v] for v in table.values()]}
                     for s in table.schemes()},
        "wall_time": {s: stats.describe([r.wall_time for r in table.select(s, ok_only=False)])
                      for s in table.schemes()},
    }
    if table.experiment == "rate_region":
        out["frontier"] = {s: f.tolist() for s, f in stats.frontier(table).items()}
        for field in ("r1", "r2"):
            out[field] = {s: {"overall": stats.scheme_stats(table, field)[s]}
                          for s in table.schemes()}
    else:
        out["gains"] = stats.gains(table)
    return out


PLOT_TEMPLATE = '''"""Render figures from the CSV files in this directory.

Usage: python plot_figures.py
"""

from pathlib import Path

from irs_wpcn.harness.plotting import render_figures

FIGURES = {figures}

if __name__ == "__main__":
    for path in render_figures(Path(__file__).resolve().parent, FIGURES):
        print(path)
'''


def write_plot_script(directory, experiments) -> Path:
    names = {CSV_NAMES[e] for e in experiments}
    figs = [f for f in FIGURES if f["csv"] in names]
    body = "[\n" + "".join(f"    {f!r},\n" for f in figs) + "]"
    path = Path(directory) / PLOT_SCRIPT
    path.write_text(PLOT_TEMPLATE.format(figures=body), encoding="utf-8")
    return path


def emit_outputs(tables: dict, config: ExperimentConfig, directory=None,
                 figures: bool = True, timing: dict | None = None) -> dict:
    """Write CSVs, ``manifest.json``, ``plot_figures.py`` and (optionally) PNGs.

    Returns a mapping from artifact kind to written paths.
    """
    if not tables:
        raise ValueError("no result tables to emit")
    directory = Path(directory or config.output_dir)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {directory}: {exc}") from exc
    written = {"csv": [], "figures": []}
    for name, table in tables.items():
        path = directory / CSV_NAMES[name]
        try:
            written["csv"].append(write_csv(table, path, config.record_timing))
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
    manifest = {
        "library": "irs_wpcn",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "config": config.to_dict(),
        "experiments": {name: summarize(t) for name, t in tables.items()},
        "timing": timing or {},
    }
    mpath = directory / MANIFEST
    mpath.write_text(json.dumps(_clean(manifest), indent=2) + "\n", encoding="utf-8")
    written["manifest"] = mpath
    written["plot_script"] = write_plot_script(directory, tables)
    if figures:
        written["figures"] = render_figures(directory,
                                            [f for f in FIGURES if f["csv"] in
                                             {CSV_NAMES[e] for e in tables}])
    return written
