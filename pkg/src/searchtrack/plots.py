"""SVG figures drawn from result archives, each with the series CSV it was drawn from."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiment import read_matrix, table_text  # noqa: E402
from .planner import GREEDY_BOUND  # noqa: E402

PLOT_KINDS = ("ratio", "trajectories", "heatmap", "entropy", "scaling")

# Which archive command produces the inputs for each figure
_SOURCE = {
    "ratio": ("certify", "ratios.csv"),
    "trajectories": ("run", "runs/*.csv and truth/*.csv"),
    "heatmap": ("run", "grids/*.csv"),
    "entropy": ("run", "runs/*.csv"),
    "scaling": ("sweep", "scaling.csv"),
}


class PlotError(RuntimeError):
    pass


def _missing(kind: str, archive: Path) -> PlotError:
    cmd, files = _SOURCE[kind]
    return PlotError(f"{kind} plot needs {files} in {archive}; produce them with `searchtrack {cmd}` first")


def _read_rows(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _manifest(archive: Path) -> dict:
    path = archive / "manifest.json"
    return json.loads(path.read_text()) if path.exists() else {}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_ratio(archive: Path, out: Path) -> list[Path]:
    src = archive / "ratios.csv"
    rows = _read_rows(src) if src.exists() else []
    if not rows:
        raise _missing("ratio", archive)
    fig, ax = plt.subplots(figsize=(7, 4))
    groups = sorted({(r["scenario"], int(r["S"])) for r in rows})
    for g, (scn, S) in enumerate(groups):
        vals = [float(r["ratio"]) for r in rows if r["scenario"] == scn and int(r["S"]) == S]
        x = g + np.linspace(-0.3, 0.3, len(vals)) if len(vals) > 1 else np.array([g])
        ax.plot(x, vals, "o", ms=3, label=f"{scn} S={S}")
    ax.axhline(GREEDY_BOUND, color="k", ls="--", lw=1, label="1 - 1/e")
    ax.set_xticks(range(len(groups)), [f"{s}\nS={n}" for s, n in groups], fontsize=7)
    ax.set_ylabel("greedy / optimal")
    ax.set_ylim(min(0.6, min(float(r["ratio"]) for r in rows) - 0.02), 1.02)
    ax.legend(fontsize=6, loc="lower right")
    series = out / "ratio_series.csv"
    series.write_text(table_text(rows, list(rows[0].keys())))
    return [_save(fig, out / "ratio.svg"), series]


def _run_files(archive: Path) -> list[Path]:
    d = archive / "runs"
    return sorted(d.glob("*.csv")) if d.is_dir() else []


def plot_trajectories(archive: Path, out: Path) -> list[Path]:
    runs = _run_files(archive)
    truth_dir = archive / "truth"
    if not runs or not truth_dir.is_dir() or not any(truth_dir.glob("*.csv")):
        raise _missing("trajectories", archive)
    written = []
    manifest = _manifest(archive)
    seen_modes = set()
    for path in runs:
        mode, seed = path.stem.rsplit("_", 1)
        if mode in seen_modes:
            continue
        seen_modes.add(mode)
        rows = _read_rows(path)
        truth = _read_rows(truth_dir / f"{seed}.csv")
        fig, ax = plt.subplots(figsize=(5, 5))
        for label in sorted({t["label"] for t in truth}):
            pts = np.array([(float(t["x"]), float(t["y"])) for t in truth if t["label"] == label])
            ax.plot(pts[:, 0], pts[:, 1], "k-", lw=1)
            ax.annotate(label, pts[0], fontsize=7)
        n_agents = sum(1 for c in rows[0] if c.startswith("x") and c[1:].isdigit())
        series = []
        for s in range(1, n_agents + 1):
            xy = np.array([(float(r[f"x{s}"]), float(r[f"y{s}"])) for r in rows])
            ax.plot(xy[:, 0], xy[:, 1], lw=1, label=f"agent {s}")
            series += [{"agent": s, "k": int(r["k"]), "x": float(r[f"x{s}"]), "y": float(r[f"y{s}"])} for r in rows]
        if "area" in manifest:
            xmin, xmax, ymin, ymax = manifest["area"]
            ax.set_xlim(xmin, xmax)
            ax.set_ylim(ymin, ymax)
        ax.set_aspect("equal")
        ax.set_title(f"{mode}, seed {seed}")
        ax.legend(fontsize=6)
        csv_path = out / f"trajectories_{mode}.csv"
        csv_path.write_text(table_text(series, ("agent", "k", "x", "y")))
        written += [_save(fig, out / f"trajectories_{mode}.svg"), csv_path]
    return written


def plot_heatmap(archive: Path, out: Path) -> list[Path]:
    d = archive / "grids"
    files = sorted(d.glob("*.csv")) if d.is_dir() else []
    if not files:
        raise _missing("heatmap", archive)
    by_mode: dict[str, list[np.ndarray]] = {}
    for path in files:
        mode = path.stem.rsplit("_", 1)[0]
        by_mode.setdefault(mode, []).append(read_matrix(path))
    manifest = _manifest(archive)
    written = []
    for mode, grids in by_mode.items():
        # averaging over Monte-Carlo runs; a single run is passed through untouched
        m = grids[0] if len(grids) == 1 else np.mean(grids, axis=0)
        fig, ax = plt.subplots(figsize=(5, 4.5))
        extent = manifest.get("area")
        im = ax.imshow(m, origin="lower", extent=extent, cmap="viridis")
        fig.colorbar(im, ax=ax, label="occupancy probability")
        ax.set_title(f"final occupancy grid, {mode}")
        csv_path = out / f"heatmap_{mode}.csv"
        csv_path.write_text("\n".join(",".join(repr(float(v)) for v in row) for row in m) + "\n")
        written += [_save(fig, out / f"heatmap_{mode}.svg"), csv_path]
    return written


def plot_entropy(archive: Path, out: Path) -> list[Path]:
    runs = _run_files(archive)
    if not runs:
        raise _missing("entropy", archive)
    by_mode: dict[str, list[list[float]]] = {}
    ks: dict[str, list[int]] = {}
    for path in runs:
        mode = path.stem.rsplit("_", 1)[0]
        rows = _read_rows(path)
        by_mode.setdefault(mode, []).append([float(r["search_entropy"]) for r in rows])
        ks[mode] = [int(r["k"]) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    series = []
    for mode, curves in by_mode.items():
        mean = np.mean(curves, axis=0)
        ax.plot(ks[mode], mean, label=mode)
        series += [{"mode": mode, "k": k, "search_entropy": float(v)} for k, v in zip(ks[mode], mean)]
    ax.set_xlabel("timestep")
    ax.set_ylabel("mean cell entropy (nats)")
    ax.legend()
    csv_path = out / "entropy_series.csv"
    csv_path.write_text(table_text(series, ("mode", "k", "search_entropy")))
    return [_save(fig, out / "entropy.svg"), csv_path]


def plot_scaling(archive: Path, out: Path) -> list[Path]:
    src = archive / "scaling.csv"
    rows = _read_rows(src) if src.exists() else []
    if not rows:
        raise _missing("scaling", archive)
    fig, ax = plt.subplots(figsize=(6, 4))
    for mode in sorted({r["mode"] for r in rows}):
        sel = sorted((int(r["S"]), float(r["ospa_dist"]), float(r["ospa_dist_se"])) for r in rows if r["mode"] == mode)
        S, m, se = map(np.array, zip(*sel))
        ax.errorbar(S, m, yerr=se, marker="o", capsize=3, label=mode)
    ax.set_xlabel("number of agents")
    ax.set_ylabel("mean OSPA distance (m)")
    ax.legend()
    series = out / "scaling_series.csv"
    series.write_text(table_text(rows, list(rows[0].keys())))
    return [_save(fig, out / "scaling.svg"), series]


_PLOTTERS = {
    "ratio": plot_ratio,
    "trajectories": plot_trajectories,
    "heatmap": plot_heatmap,
    "entropy": plot_entropy,
    "scaling": plot_scaling,
}


def emit_plots(archive, kind: str, out=None) -> list[Path]:
    """Draw figure ``kind`` from ``archive``; returns the written paths (SVG first)."""
    if kind not in _PLOTTERS:
        raise PlotError(f"unknown plot kind {kind!r}; choose from {PLOT_KINDS}")
    archive = Path(archive)
    if not archive.is_dir():
        raise _missing(kind, archive)
    out = Path(out) if out is not None else archive / "plots"
    # inputs are checked before anything is created
    try:
        out.mkdir(parents=True, exist_ok=True)
        return _PLOTTERS[kind](archive, out)
    except PlotError:
        if out.exists() and not any(out.iterdir()):
            out.rmdir()
        raise
