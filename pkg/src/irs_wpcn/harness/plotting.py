"""Figures rendered from the emitted CSV files.

``FIGURES`` is the declarative description shared by the package and by the
generated ``plot_figures.py`` script.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

FIGURES = [
    {"csv": "sweep_n.csv", "png": "fig_sweep_n.png", "kind": "sweep",
     "xlabel": "Number of reflecting elements N", "ylabel": "Common throughput (bps/Hz)"},
    {"csv": "sweep_d12.csv", "png": "fig_sweep_d12.png", "kind": "sweep",
     "xlabel": "Inter-user distance d12 (m)", "ylabel": "Common throughput (bps/Hz)"},
    {"csv": "rate_region.csv", "png": "fig_rate_region.png", "kind": "region",
     "xlabel": "R1 (bps/Hz)", "ylabel": "R2 (bps/Hz)"},
]

STYLE = {
    "CoopWithIrs": {"marker": "o", "color": "tab:red"},
    "IndepWithIrs": {"marker": "s", "color": "tab:blue"},
    "CoopNoIrs": {"marker": "^", "color": "tab:green"},
    "IndepNoIrs": {"marker": "v", "color": "tab:gray"},
}


def _load(path):
    """Mean (and standard error) per scheme and sweep value from a result CSV."""
    acc = defaultdict(lambda: defaultdict(list))
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if row["status"] != "optimal":
                continue
            acc[row["scheme"]][float(row["value"])].append(
                (float(row["min_rate"]), float(row["r1"]), float(row["r2"])))
    out = {}
    for scheme, by_value in acc.items():
        xs = sorted(by_value)
        cols = []
        for x in xs:
            vals = by_value[x]
            n = len(vals)
            m = [sum(v[i] for v in vals) / n for i in range(3)]
            var = sum((v[0] - m[0]) ** 2 for v in vals) / max(n - 1, 1)
            cols.append((x, *m, (var / n) ** 0.5))
        out[scheme] = cols
    return out


def render_figure(spec: dict, directory) -> Path | None:
    directory = Path(directory)
    src = directory / spec["csv"]
    if not src.exists():
        return None
    data = _load(src)
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    for scheme, cols in data.items():
        style = STYLE.get(scheme, {})
        if spec["kind"] == "region":
            ax.plot([c[2] for c in cols], [c[3] for c in cols], label=scheme, ms=4, **style)
        else:
            ax.errorbar([c[0] for c in cols], [c[1] for c in cols], yerr=[c[4] for c in cols],
                        label=scheme, ms=5, capsize=2, **style)
    ax.set_xlabel(spec["xlabel"])
    ax.set_ylabel(spec["ylabel"])
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    out = directory / spec["png"]
    # Fixed metadata keeps the PNG bytes stable across runs.
    fig.savefig(out, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return out


def render_figures(directory, figures=FIGURES) -> list:
    return [p for p in (render_figure(spec, directory) for spec in figures) if p is not None]
