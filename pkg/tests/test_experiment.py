import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from searchtrack.cli import main
from searchtrack.config import ScenarioConfig, get_preset, with_overrides
from searchtrack.experiment import (
    INDICATOR_COLUMNS,
    read_matrix,
    run_experiment,
    sweep_agents,
)
from searchtrack.plots import PlotError, emit_plots


def tiny(name="scenario1", steps=3, **kw):
    cfg = with_overrides(get_preset(name), steps=steps, **{"filter.n_particles": 200})
    return with_overrides(cfg, **kw) if kw else cfg


@pytest.fixture(scope="module")
def archive(tmp_path_factory):
    out = tmp_path_factory.mktemp("arc")
    run_experiment(tiny(steps=4), ("v1", "v2", "vmo"), mc=2, seed=5, out=out)
    return out


def test_empty_world_archive(tmp_path):
    cfg = ScenarioConfig(name="empty", steps=3)
    cfg.filter.n_particles = 100
    arc = run_experiment(cfg, ("vmo",), mc=1, seed=0, out=tmp_path)
    run = arc.runs[0]
    assert len(run.steps) == 3
    assert np.all(run.steps[:, 1:4] == 0.0)
    assert len((tmp_path / "runs" / "vmo_0.csv").read_text().splitlines()) == 4


def test_archive_layout(archive):
    manifest = json.loads((archive / "manifest.json").read_text())
    for f in manifest["files"]:
        assert (archive / f).exists(), f
    assert manifest["ospa"] == {"p": 1.0, "c": 100.0}
    with open(archive / "indicators.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert tuple(rows[0].keys()) == INDICATOR_COLUMNS
    assert [(r["mode"], r["seed"]) for r in rows] == [
        ("v1", "5"), ("v1", "6"), ("v2", "5"), ("v2", "6"), ("vmo", "5"), ("vmo", "6")]
    with open(archive / "summary.csv") as fh:
        summary = list(csv.DictReader(fh))
    assert [r["mode"] for r in summary] == ["v1", "v2", "vmo"]


def test_mode_rows_in_summary(tmp_path):
    arc = run_experiment(tiny(steps=2), ("v1", "v2", "vmo"), mc=1, seed=1)
    assert [r["mode"] for r in arc.summary_rows()] == ["v1", "v2", "vmo"]


def test_rerun_is_byte_identical(archive, tmp_path):
    run_experiment(tiny(steps=4), ("v1", "v2", "vmo"), mc=2, seed=5, out=tmp_path, workers=2)
    for name in ("indicators.csv", "summary.csv", "grids/vmo_6.csv", "runs/v2_5.csv", "truth/5.csv"):
        assert (tmp_path / name).read_bytes() == (archive / name).read_bytes()


def test_grid_snapshot_round_trip(archive):
    m = read_matrix(archive / "grids" / "vmo_5.csv")
    assert m.shape == (100, 100)
    assert np.all((m >= 0) & (m <= 1))


def test_unknown_mode(tmp_path):
    with pytest.raises(ValueError):
        run_experiment(tiny(), ("v3",), out=tmp_path)


def test_sweep_single_row(tmp_path):
    rows = sweep_agents(tiny(steps=2), [1], ("vmo",), mc=1, seed=0, out=tmp_path)
    assert len(rows) == 1 and rows[0]["S"] == 1
    assert (tmp_path / "scaling.csv").exists()


def test_sweep_reproducible(tmp_path):
    a = sweep_agents(tiny(steps=2), [2, 3], ("vmo",), mc=1, seed=3, out=tmp_path / "a")
    b = sweep_agents(tiny(steps=2), [2, 3], ("vmo",), mc=1, seed=3, out=tmp_path / "b")
    assert (tmp_path / "a" / "scaling.csv").read_bytes() == (tmp_path / "b" / "scaling.csv").read_bytes()


# ---- plots --------------------------------------------------------------------

def test_heatmap_equals_archived_matrix(tmp_path):
    run_experiment(tiny(steps=3), ("vmo",), mc=1, seed=2, out=tmp_path)
    paths = emit_plots(tmp_path, "heatmap")
    assert paths[0].suffix == ".svg" and paths[0].read_text().lstrip().startswith("<?xml")
    np.testing.assert_array_equal(read_matrix(paths[1]), read_matrix(tmp_path / "grids" / "vmo_2.csv"))


@pytest.mark.parametrize("kind", ["trajectories", "entropy"])
def test_run_plots(archive, tmp_path, kind):
    paths = emit_plots(archive, kind, tmp_path)
    assert any(p.suffix == ".svg" for p in paths) and any(p.suffix == ".csv" for p in paths)


def test_ratio_plot_draws_bound(tmp_path):
    (tmp_path / "ratios.csv").write_text(
        "scenario,S,instance,step,n_tracks,ratio,offset_ratio\n"
        "scenario1,2,0,5,1,1.0,1.0\nscenario1,2,1,7,2,0.9,0.7\n")
    svg, series = emit_plots(tmp_path, "ratio")
    assert series.read_text().count("\n") == 3
    # the dashed reference line is labelled in the legend
    assert "1 - 1/e" in svg.read_text()


def test_empty_archive_writes_nothing(tmp_path):
    for kind in ("ratio", "trajectories", "heatmap", "entropy", "scaling"):
        with pytest.raises(PlotError, match="searchtrack"):
            emit_plots(tmp_path, kind)
    assert list(tmp_path.iterdir()) == []


# ---- CLI ----------------------------------------------------------------------

def test_validate_config_echo(capsys):
    assert main(["validate-config", "--scenario", "scenario2", "--agents", "5"]) == 0
    out = capsys.readouterr().out
    assert "count: 5" in out and "C1" in out


def test_validate_config_reports_bad_key(tmp_path, capsys):
    p = tmp_path / "c.yaml"
    p.write_text("preset: scenario1\nagents: {cuont: 2}\n")
    assert main(["validate-config", "--config", str(p)]) == 2
    assert "agents.cuont" in capsys.readouterr().err


def test_cli_run_from_config_file(tmp_path, capsys):
    p = tmp_path / "c.yaml"
    p.write_text("preset: scenario3\nsteps: 2\nfilter: {n_particles: 100}\nagents: {count: 2}\n")
    assert main(["run", "--config", str(p), "--modes", "vmo", "--out", str(tmp_path / "o")]) == 0
    assert "scenario3,vmo,2,0," in capsys.readouterr().out


def test_cli_rejects_unknown_mode():
    with pytest.raises(SystemExit):
        main(["run", "--modes", "v1,single_v9"])


def test_cli_plot_missing_series(tmp_path, capsys):
    assert main(["plot", "ratio", "--archive", str(tmp_path)]) == 2
    assert "certify" in capsys.readouterr().err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "searchtrack", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for cmd in ("run", "sweep", "certify", "plot", "validate-config"):
        assert cmd in out.stdout
