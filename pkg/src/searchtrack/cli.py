"""Command-line harness: run, sweep, certify, plot, validate-config.

Worker processes are taken from ``--workers`` or the SEARCHTRACK_WORKERS
environment variable (default 1). Results do not depend on the worker count.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import PRESETS, ConfigError, echo_config, get_preset, load_config, with_overrides
from .experiment import (
    INDICATOR_COLUMNS,
    certify_experiment,
    default_workers,
    run_experiment,
    sweep_agents,
    table_text,
)
from .planner import GREEDY_BOUND
from .plots import PLOT_KINDS, PlotError, emit_plots
from .sim import MODES


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _modes(text: str) -> list[str]:
    modes = [m.strip().lower() for m in text.split(",") if m.strip()]
    for m in modes:
        if m not in MODES:
            raise argparse.ArgumentTypeError(f"unknown mode {m!r}; choose from {','.join(MODES)}")
    return modes


def _scenario_args(p: argparse.ArgumentParser, agents_list: bool = False) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--config", type=Path, help="YAML scenario file")
    g.add_argument("--scenario", choices=sorted(PRESETS), help="built-in preset")
    if agents_list:
        p.add_argument("--agents", type=_int_list, help="comma-separated team sizes")
    else:
        p.add_argument("--agents", type=int, help="team size (overrides the config)")
    p.add_argument("--steps", type=int, help="number of timesteps (overrides the config)")


def _common_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--modes", type=_modes, default=list(MODES), help="comma list of v1,v2,vmo")
    p.add_argument("--mc", type=int, default=1, help="Monte-Carlo runs per mode")
    p.add_argument("--seed", type=int, default=0, help="master seed; run i uses seed+i")
    p.add_argument("--out", type=Path, help="archive directory")
    p.add_argument("--workers", type=int, help="worker processes (default: $SEARCHTRACK_WORKERS or 1)")


def _load(args, agents=None):
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        cfg = get_preset(args.scenario or "scenario1")
    changes = {}
    if agents is not None:
        changes["agents.count"] = agents
    if getattr(args, "steps", None) is not None:
        changes["steps"] = args.steps
    return with_overrides(cfg, **changes) if changes else cfg


def cmd_run(args) -> int:
    cfg = _load(args, args.agents)
    out = args.out or Path("results") / cfg.name
    archive = run_experiment(cfg, args.modes, args.mc, args.seed, out, args.workers or default_workers())
    sys.stdout.write(archive.indicator_table())
    cols = ["mode", "n_runs", "ospa_dist", "ospa_loc", "ospa_card", "search_entropy"]
    print()
    print(table_text(archive.summary_rows(), cols), end="")
    print(f"archive: {out}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    counts = args.agents or [1, 2, 3, 4, 5]
    out = args.out or Path("results") / f"{cfg.name}_sweep"
    rows = sweep_agents(cfg, counts, args.modes, args.mc, args.seed, out, args.workers or default_workers())
    print(table_text(rows, ("S", "mode", "n_runs", "ospa_dist", "ospa_dist_se")), end="")
    print(f"archive: {out}")
    return 0


def cmd_certify(args) -> int:
    if args.config is not None or args.scenario is not None:
        cfgs = [_load(args)]
    else:
        cfgs = [get_preset(name) for name in sorted(PRESETS)]
    counts = args.agents or [2, 3]
    out = args.out or Path("results") / "certify"
    rows = certify_experiment(cfgs, counts, args.mc, args.seed, args.horizon, out,
                              args.workers or default_workers())
    failed = [r for r in rows if r["ratio"] < GREEDY_BOUND]
    at_one = sum(r["ratio"] >= 1.0 - 1e-12 for r in rows)
    print(f"instances: {len(rows)}  min ratio: {min(r['ratio'] for r in rows):.6f}  "
          f"at optimum: {at_one}/{len(rows)}  below 1-1/e: {len(failed)}")
    print(f"archive: {out}")
    return 1 if failed else 0


def cmd_plot(args) -> int:
    paths = emit_plots(args.archive, args.kind, args.out)
    for p in paths:
        print(p)
    return 0


def cmd_validate(args) -> int:
    cfg = _load(args, args.agents)
    sys.stdout.write(echo_config(cfg))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="searchtrack", description="Multi-agent search and track experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="closed-loop Monte-Carlo runs; writes an archive")
    _scenario_args(p)
    _common_run_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="mean OSPA against team size")
    _scenario_args(p, agents_list=True)
    _common_run_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("certify", help="greedy vs brute-force optimality ratio")
    _scenario_args(p, agents_list=True)
    p.add_argument("--mc", type=int, default=20, help="instances per scenario and team size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=int, default=2)
    p.add_argument("--out", type=Path)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("plot", help="SVG figure from an archive")
    p.add_argument("kind", choices=PLOT_KINDS)
    p.add_argument("--archive", type=Path, required=True)
    p.add_argument("--out", type=Path, help="output directory (default: <archive>/plots)")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("validate-config", help="check a configuration and echo it fully expanded")
    _scenario_args(p)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PlotError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
