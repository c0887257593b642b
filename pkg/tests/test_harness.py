import json
import math
import statistics

import numpy as np
import pytest
import yaml

from irs_wpcn import SystemParams
from irs_wpcn.harness import cli
from irs_wpcn.harness.config import ConfigError, ExperimentConfig, from_dict, load_config
from irs_wpcn.harness.experiments import ROW_FIELDS, ResultTable, run_experiment
from irs_wpcn.harness.outputs import (CSV_NAMES, MANIFEST, PLOT_SCRIPT, csv_fields,
                                      emit_outputs, read_csv, write_csv)
from irs_wpcn.harness.stats import (describe, domination_margin, dominance, frontier, gains,
                                    hull_audit)
from irs_wpcn.harness.validate import run_validation

SMALL = {
    "n_elements": 3,
    "n_grid": [2, 3],
    "d12_grid": [2.0, 3.0],
    "omega_grid": [0.0, 0.5, 1.0],
    "realizations": 2,
    "trials": 50,
    "seed": 7,
}


@pytest.fixture(scope="module")
def small():
    return from_dict(SMALL)


@pytest.fixture(scope="module")
def tables(small):
    return {e: run_experiment(small, e) for e in small.experiments}


def _write(tmp_path, doc, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return path


# config


def test_defaults():
    c = ExperimentConfig()
    assert c.n_grid == (10, 20, 30, 40, 50)
    assert c.d12_grid == (2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0)
    assert len(c.omega_grid) == 21 and c.omega_grid[-1] == 1.0
    assert c.realizations == 100 and c.seed == 2020 and c.trials == 500
    assert c.params() == SystemParams.from_dbm()


def test_sections_and_round_trip(tmp_path):
    doc = {"geometry": {"d1": 9.0}, "system": {"eta": 0.5}, "solver": {"max_rounds": 40},
           "realizations": 3}
    c = load_config(_write(tmp_path, doc))
    assert c.d1 == 9.0 and c.eta == 0.5 and c.max_rounds == 40 and c.realizations == 3
    assert c.settings().max_rounds == 40
    assert from_dict(c.to_dict()) == c


def test_geometry_follows_second_device(small):
    g = small.geometry(3.0)
    assert tuple(g.wd1_position) == (8.0, 0.0)
    assert tuple(g.wd2_position) == (5.0, 0.0)
    assert tuple(g.irs_position) == (5.0, 2.0)


@pytest.mark.parametrize("doc", [
    {"bogus": 1},
    {"realizations": 0},
    {"schemes": ["Nope"]},
    {"experiments": ["sweep_x"]},
    {"system": {"eta": 1.5}},
    {"omega_grid": [1.2]},
    {"failure_threshold": -0.1},
])
def test_invalid_configs_rejected(doc):
    with pytest.raises(ConfigError):
        from_dict(doc)


def test_unreadable_config(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("realizations: [1,\n")
    with pytest.raises(ConfigError):
        load_config(bad)


# experiments and outputs


def test_row_counts(tables, small):
    assert len(tables["sweep_n"].rows) == 2 * 2 * 4
    assert len(tables["sweep_d12"].rows) == 2 * 2 * 4
    assert len(tables["rate_region"].rows) == 3 * 2 * 3
    for t in tables.values():
        assert t.failures == 0


def test_single_cell_row_count(small):
    c = small.replace(realizations=1, schemes=("CoopNoIrs",), n_grid=(2,))
    t = run_experiment(c, "sweep_n")
    assert len(t.rows) == 1
    assert t.rows[0].scheme == "CoopNoIrs"


def test_schemes_share_realization_seed(tables):
    rows = [r for r in tables["sweep_n"].rows if r.value == 2 and r.realization == 1]
    assert len({r.seed for r in rows}) == 1


def test_csv_round_trip_exact(tables, tmp_path):
    for name, t in tables.items():
        path = write_csv(t, tmp_path / CSV_NAMES[name])
        back = read_csv(path, name)
        assert len(back.rows) == len(t.rows)
        for a, b in zip(t.rows, back.rows):
            for f in csv_fields():
                x, y = getattr(a, f), getattr(b, f)
                if isinstance(x, float) and math.isnan(x):
                    assert math.isnan(y)
                else:
                    assert x == y, f
    header = (tmp_path / CSV_NAMES["sweep_n"]).read_text().splitlines()[0].split(",")
    assert "wall_time" not in header
    assert set(csv_fields(True)) == set(ROW_FIELDS)


def test_emit_outputs(tables, small, tmp_path):
    out = emit_outputs(tables, small, tmp_path / "res")
    names = {p.name for p in (tmp_path / "res").iterdir()}
    assert set(CSV_NAMES.values()) | {MANIFEST, PLOT_SCRIPT} <= names
    assert len(out["figures"]) >= 3
    assert all(p.suffix == ".png" and p.stat().st_size > 0 for p in out["figures"])
    manifest = json.loads((tmp_path / "res" / MANIFEST).read_text())
    assert manifest["config"]["seed"] == 7
    # Summary statistics agree with an independent recomputation.
    t = tables["sweep_n"]
    mr = manifest["experiments"]["sweep_n"]["min_rate"]
    for s in t.schemes():
        for j, v in enumerate(t.values()):
            xs = [r.min_rate for r in t.rows if r.scheme == s and r.value == v]
            entry = mr[s]["by_value"][j]
            assert entry["mean"] == pytest.approx(statistics.fmean(xs), rel=1e-12)
            assert entry["stderr"] == pytest.approx(statistics.stdev(xs) / math.sqrt(len(xs)),
                                                    rel=1e-12)


def test_emit_outputs_no_figures(tables, small, tmp_path):
    out = emit_outputs({"sweep_n": tables["sweep_n"]}, small, tmp_path, figures=False)
    assert out["figures"] == []
    assert not list(tmp_path.glob("*.png"))
    assert "sweep_n.csv" in (tmp_path / PLOT_SCRIPT).read_text()


def test_unwritable_directory_raises(tables, small, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        emit_outputs(tables, small, blocker / "sub", figures=False)


# statistics


def test_describe_matches_statistics_module():
    xs = [0.3, 1.7, 2.2, 0.9]
    d = describe(xs)
    assert d["n"] == 4
    assert d["mean"] == pytest.approx(statistics.fmean(xs), rel=1e-15)
    assert d["std"] == pytest.approx(statistics.stdev(xs), rel=1e-14)
    assert describe([])["mean"] is None


def test_gains_both_ways(tables):
    g = gains(tables["sweep_n"])
    assert set(g) == {"IndepWithIrs", "CoopNoIrs", "IndepNoIrs"}
    for entry in g.values():
        assert np.isfinite(entry["per_point"]) and np.isfinite(entry["pooled"])
        assert entry["per_point"] == pytest.approx(np.mean(entry["by_point"]))


def test_domination_margin_cases():
    pts = np.array([[0.0, 2.0], [2.0, 0.0]])
    # (0.5, 0.5) sits 0.5 below the segment in both coordinates.
    assert domination_margin(pts, np.array([0.5, 0.5])) == pytest.approx(0.5, abs=1e-9)
    assert domination_margin(pts, np.array([1.0, 1.0])) == pytest.approx(0.0, abs=1e-9)
    assert domination_margin(pts, np.array([1.5, 1.5])) < 0


def test_hull_audit_and_dominance():
    w = np.linspace(0, 1, 5)
    theta = np.arctan2(w, 1 - w)  # tangent point of the unit circle for weight w
    good = np.column_stack([w, np.sin(theta), np.cos(theta)])
    assert hull_audit(good)["ok"]
    bad = good.copy()
    bad[2, 1:] *= 0.5
    assert not hull_audit(bad)["ok"]
    assert dominance(good[:, 1:], bad[:, 1:])["ok"]
    assert not dominance(bad[:, 1:], good[:, 1:])["ok"]


def test_frontier_shape(tables):
    f = frontier(tables["rate_region"])
    assert set(f) == {"CoopWithIrs", "IndepWithIrs", "IndepNoIrs"}
    assert all(v.shape == (3, 3) for v in f.values())


# cli


def test_cli_run_and_determinism(tmp_path):
    doc = dict(SMALL, experiments=["sweep_n"], realizations=2)
    cfg = _write(tmp_path, doc)
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["sweep-n", str(cfg), "-o", str(a), "-j", "1", "--no-figures"]) == 0
    assert cli.main(["sweep-n", str(cfg), "-o", str(b), "-j", "2", "--no-figures"]) == 0
    assert (a / "sweep_n.csv").read_bytes() == (b / "sweep_n.csv").read_bytes()


def test_cli_config_errors(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "missing.yaml")]) == 1
    assert "config error" in capsys.readouterr().err
    cfg = _write(tmp_path, {"bogus": True})
    assert cli.main(["run", str(cfg)]) == 1


def test_cli_output_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = _write(tmp_path, dict(SMALL, experiments=["sweep_n"], realizations=1))
    assert cli.main(["run", str(cfg), "-o", str(blocker / "x"), "--no-figures"]) == 1


def test_cli_failure_threshold(tmp_path, monkeypatch):
    from irs_wpcn.harness import experiments

    def boom(*args, **kwargs):
        raise RuntimeError("solver exploded")

    monkeypatch.setattr(experiments, "run_scheme", boom)
    cfg = _write(tmp_path, dict(SMALL, experiments=["sweep_n"], realizations=1))
    assert cli.main(["run", str(cfg), "-o", str(tmp_path / "o"), "--no-figures"]) == 2
    rows = read_csv(tmp_path / "o" / "sweep_n.csv").rows
    assert all(r.status == "error" and math.isnan(r.min_rate) for r in rows)


def test_cli_validate(tmp_path, capsys):
    assert cli.main(["validate", "--instances", "3"]) == 0
    assert "lifting" in capsys.readouterr().out


def test_validation_report(small):
    rep = run_validation(small, instances=3, seed=1)
    assert rep.ok, rep.failures
    assert rep.checks["lifting"][1] == 3


def test_result_table_accessors(tables):
    t = tables["sweep_d12"]
    assert isinstance(t, ResultTable)
    assert t.sweep_variable == "d12"
    assert t.values() == [2.0, 3.0]
    assert t.failure_rate == 0.0
    assert len(t.select("CoopWithIrs", 2.0)) == 2
