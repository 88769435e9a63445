"""Monte-Carlo experiment runner and on-disk result archives.

Archive layout (one directory per experiment)::

    manifest.json        what was run, OSPA parameters, file list
    config.yaml          the fully expanded scenario configuration
    indicators.csv       one row per (mode, run): scenario,mode,S,seed,ospa_dist,ospa_loc,ospa_card,search_entropy
    summary.csv          Monte-Carlo means and standard errors per mode
    runs/<mode>_<seed>.csv   per-timestep indicators and agent positions
    grids/<mode>_<seed>.csv  final occupancy grid, dense row-major matrix
    truth/<seed>.csv     true object positions per timestep

Every run draws from Philox generators keyed by (run seed, stream, mode), so
results do not depend on worker count or scheduling. Run ``i`` of an
experiment with master seed ``s`` uses run seed ``s + i``.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import ScenarioConfig, echo_config, with_overrides
from .metrics import INDICATORS, aggregate_run, mc_summary
from .planner import PlannerConfig, certify
from .sim import MODES, World, build_truth, initial_state, run_closed_loop, step_world, value_model

INDICATOR_COLUMNS = ("scenario", "mode", "S", "seed") + INDICATORS
WORKERS_ENV = "SEARCHTRACK_WORKERS"


def rng_for(run_seed: int, stream: int, mode: str = "") -> np.random.Generator:
    """Counter-based generator for one (run, stream, mode) substream."""
    key = [run_seed, stream] + ([MODES.index(mode)] if mode else [])
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def default_workers() -> int:
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


@dataclass
class RunOutput:
    mode: str
    seed: int
    indicators: dict
    steps: np.ndarray  # (T, 7): k, dist, loc, card, entropy, n_tracks, n_est
    poses: np.ndarray  # (T, S, 3)
    grid: np.ndarray
    truth: list  # per step: (label, x, y) tuples


def run_single(cfg: ScenarioConfig, mode: str, run_seed: int) -> RunOutput:
    truth = build_truth(cfg, rng_for(run_seed, 0))
    world = World.from_config(cfg, truth, mode)
    state, records = run_closed_loop(world, rng_for(run_seed, 1, mode))
    steps = np.array(
        [
            (r.k, r.ospa_dist, r.ospa_loc, r.ospa_card, r.search_entropy, r.n_tracks, len(r.estimates))
            for r in records
        ],
        dtype=float,
    )
    truth_rows = []
    for k in range(1, cfg.steps + 1):
        for i in truth.alive(k):
            x = truth.states[i, k]
            truth_rows.append((k, truth.scripts[i].label, x[0], x[2]))
    return RunOutput(
        mode=mode,
        seed=run_seed,
        indicators=aggregate_run(records),
        steps=steps,
        poses=np.array([r.poses for r in records]),
        grid=np.array(state.grid.cells),
        truth=truth_rows,
    )


def _run_task(args):
    return run_single(*args)


def _map(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


@dataclass
class Archive:
    cfg: ScenarioConfig
    modes: tuple
    seed: int
    mc: int
    runs: list

    def indicator_rows(self) -> list[dict]:
        rows = []
        for run in self.runs:
            row = {"scenario": self.cfg.name, "mode": run.mode, "S": self.cfg.agents.count, "seed": run.seed}
            row.update(run.indicators)
            rows.append(row)
        return rows

    def summary_rows(self) -> list[dict]:
        rows = []
        for mode in self.modes:
            sel = [r for r in self.indicator_rows() if r["mode"] == mode]
            row = {"scenario": self.cfg.name, "mode": mode, "S": self.cfg.agents.count}
            row.update(mc_summary(sel))
            row["ospa_p"] = self.cfg.evaluation.ospa_p
            row["ospa_c"] = self.cfg.evaluation.ospa_c
            rows.append(row)
        return rows

    def indicator_table(self) -> str:
        return table_text(self.indicator_rows(), INDICATOR_COLUMNS)


def table_text(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def write_matrix(path: Path, m: np.ndarray) -> None:
    lines = [",".join(repr(float(v)) for v in row) for row in np.atleast_2d(m)]
    path.write_text("\n".join(lines) + "\n")


def read_matrix(path: Path) -> np.ndarray:
    return np.array(
        [[float(v) for v in line.split(",")] for line in Path(path).read_text().splitlines() if line]
    )


def write_archive(archive: Archive, out) -> Path:
    out = Path(out)
    for sub in ("runs", "grids", "truth"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    cfg = archive.cfg
    (out / "config.yaml").write_text(echo_config(cfg))
    (out / "indicators.csv").write_text(archive.indicator_table())
    summary_cols = ["scenario", "mode", "S", "n_runs"]
    for key in INDICATORS:
        summary_cols += [key, key + "_se"]
    summary_cols += ["ospa_p", "ospa_c"]
    (out / "summary.csv").write_text(table_text(archive.summary_rows(), summary_cols))
    S = cfg.agents.count
    step_cols = ["k", "ospa_dist", "ospa_loc", "ospa_card", "search_entropy", "n_tracks", "n_estimates"]
    pose_cols = [f"{c}{s + 1}" for s in range(S) for c in ("x", "y")]
    files = ["config.yaml", "indicators.csv", "summary.csv"]
    for run in archive.runs:
        rows = []
        for t in range(len(run.steps)):
            row = dict(zip(step_cols, run.steps[t]))
            for c in ("k", "n_tracks", "n_estimates"):
                row[c] = int(row[c])
            for s in range(S):
                row[f"x{s + 1}"], row[f"y{s + 1}"] = run.poses[t, s, 0], run.poses[t, s, 1]
            rows.append(row)
        name = f"{run.mode}_{run.seed}.csv"
        (out / "runs" / name).write_text(table_text(rows, step_cols + pose_cols))
        write_matrix(out / "grids" / name, run.grid)
        files += [f"runs/{name}", f"grids/{name}"]
    for run in archive.runs:
        path = out / "truth" / f"{run.seed}.csv"
        if not path.exists():
            rows = [dict(zip(("k", "label", "x", "y"), r)) for r in run.truth]
            path.write_text(table_text(rows, ("k", "label", "x", "y")))
            files.append(f"truth/{run.seed}.csv")
    manifest = {
        "kind": "run",
        "scenario": cfg.name,
        "modes": list(archive.modes),
        "mc": archive.mc,
        "seed": archive.seed,
        "agents": S,
        "steps": cfg.steps,
        "grid_shape": [cfg.grid.rows, cfg.grid.cols],
        "area": [cfg.area.xmin, cfg.area.xmax, cfg.area.ymin, cfg.area.ymax],
        "ospa": {"p": cfg.evaluation.ospa_p, "c": cfg.evaluation.ospa_c},
        "files": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return out


def run_experiment(
    cfg: ScenarioConfig,
    modes: Sequence[str] = MODES,
    mc: int = 1,
    seed: int = 0,
    out=None,
    workers: Optional[int] = None,
) -> Archive:
    """Closed-loop runs for every mode and Monte-Carlo index; written to ``out`` when given."""
    for m in modes:
        if m not in MODES:
            raise ValueError(f"unknown mode {m!r}; choose from {MODES}")
    if mc < 1:
        raise ValueError("mc must be >= 1")
    tasks = [(cfg, mode, seed + i) for mode in modes for i in range(mc)]
    runs = _map(_run_task, tasks, workers or default_workers())
    archive = Archive(cfg, tuple(modes), seed, mc, runs)
    if out is not None:
        write_archive(archive, out)
    return archive


SCALING_COLUMNS = ("scenario", "S", "mode", "n_runs", "ospa_dist", "ospa_dist_se")


def sweep_agents(
    cfg: ScenarioConfig,
    agent_counts: Sequence[int],
    modes: Sequence[str] = MODES,
    mc: int = 1,
    seed: int = 0,
    out=None,
    workers: Optional[int] = None,
) -> list[dict]:
    """Mean OSPA distance against team size for each mode."""
    rows = []
    for S in agent_counts:
        sub = with_overrides(cfg, **{"agents.count": int(S)})
        target = None if out is None else Path(out) / f"S{S}"
        archive = run_experiment(sub, modes, mc, seed, target, workers)
        for srow in archive.summary_rows():
            rows.append(
                {
                    "scenario": cfg.name,
                    "S": int(S),
                    "mode": srow["mode"],
                    "n_runs": srow["n_runs"],
                    "ospa_dist": srow["ospa_dist"],
                    "ospa_dist_se": srow["ospa_dist_se"],
                }
            )
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "scaling.csv").write_text(table_text(rows, SCALING_COLUMNS))
        manifest = {"kind": "sweep", "scenario": cfg.name, "agents": [int(s) for s in agent_counts],
                    "modes": list(modes), "mc": mc, "seed": seed, "files": ["scaling.csv"]}
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return rows


RATIO_COLUMNS = ("scenario", "S", "instance", "step", "n_tracks", "ratio", "offset_ratio")


def certify_instance(cfg: ScenarioConfig, instance_seed: int, horizon: int = 2,
                     warmup: tuple[int, int] = (3, 30)) -> dict:
    """Drive the team with greedy V_mo for a random number of steps, then compare greedy to brute force."""
    rng = rng_for(instance_seed, 2)
    k = int(rng.integers(warmup[0], warmup[1] + 1))
    cfg = with_overrides(cfg, **{"steps": max(cfg.steps, k), "planner.horizon": horizon})
    truth = build_truth(cfg, rng_for(instance_seed, 0))
    world = World.from_config(cfg, truth, "vmo")
    state = initial_state(cfg, truth)
    sim_rng = rng_for(instance_seed, 1, "vmo")
    for _ in range(k):
        state, _rec = step_world(world, state, sim_rng)
    model = value_model(world, state, horizon)
    cert = certify(model, PlannerConfig(horizon=horizon, objective="vmo"))
    return {"step": k, "n_tracks": len(state.bank.tracks), "ratio": cert.ratio,
            "offset_ratio": cert.offset_ratio}


def _certify_task(args):
    cfg, S, i, seed, horizon = args
    sub = with_overrides(cfg, **{"agents.count": S})
    row = {"scenario": cfg.name, "S": S, "instance": i}
    row.update(certify_instance(sub, seed + i, horizon))
    return row


def certify_experiment(
    cfgs: Sequence[ScenarioConfig],
    agent_counts: Sequence[int] = (2, 3),
    mc: int = 20,
    seed: int = 0,
    horizon: int = 2,
    out=None,
    workers: Optional[int] = None,
) -> list[dict]:
    tasks = [(cfg, int(S), i, seed, horizon) for cfg in cfgs for S in agent_counts for i in range(mc)]
    rows = _map(_certify_task, tasks, workers or default_workers())
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "ratios.csv").write_text(table_text(rows, RATIO_COLUMNS))
        manifest = {"kind": "certify", "scenarios": [c.name for c in cfgs],
                    "agents": [int(s) for s in agent_counts], "mc": mc, "seed": seed,
                    "horizon": horizon, "files": ["ratios.csv"]}
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return rows
