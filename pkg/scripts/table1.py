"""Indicator table for the four scenarios: V1, V2 and V_mo planning, Monte-Carlo averaged.

    python scripts/table1.py --mc 20 --agents 3 --out results/table1
"""

import argparse
from pathlib import Path

from searchtrack.config import PRESETS, get_preset, with_overrides
from searchtrack.experiment import run_experiment, table_text


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenarios", default=",".join(sorted(PRESETS)))
    ap.add_argument("--agents", type=int, default=3)
    ap.add_argument("--mc", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--steps", type=int, default=None)
    ap.add_argument("--sensor", choices=["range_bearing", "vision"], default="range_bearing")
    ap.add_argument("--out", type=Path, default=Path("results/table1"))
    args = ap.parse_args()

    rows = []
    for name in args.scenarios.split(","):
        changes = {"agents.count": args.agents, "sensor.kind": args.sensor}
        if args.steps:
            changes["steps"] = args.steps
        cfg = with_overrides(get_preset(name), **changes)
        archive = run_experiment(cfg, ("v1", "v2", "vmo"), args.mc, args.seed, args.out / name)
        rows += archive.summary_rows()
        print(f"{name}: done")
    cols = ["scenario", "mode", "S", "n_runs", "ospa_dist", "ospa_dist_se", "ospa_loc",
            "ospa_card", "search_entropy"]
    text = table_text(rows, cols)
    (args.out / "table1.csv").write_text(text)
    print(text, end="")


if __name__ == "__main__":
    main()
