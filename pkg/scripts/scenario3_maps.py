"""Occupancy heat maps, agent trajectories and search entropy for scenario 3 under each objective.

    python scripts/scenario3_maps.py --mc 5 --out results/scenario3
"""

import argparse
from pathlib import Path

from searchtrack.config import get_preset, with_overrides
from searchtrack.experiment import run_experiment
from searchtrack.plots import emit_plots


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--agents", type=int, default=3)
    ap.add_argument("--mc", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("results/scenario3"))
    args = ap.parse_args()

    cfg = with_overrides(get_preset("scenario3"), **{"agents.count": args.agents})
    run_experiment(cfg, ("v1", "v2", "vmo"), args.mc, args.seed, args.out)
    for kind in ("heatmap", "trajectories", "entropy"):
        for p in emit_plots(args.out, kind):
            print(p)


if __name__ == "__main__":
    main()
