"""Mean OSPA distance against team size on the explosion scenario.

    python scripts/agent_scaling.py --agents 2,4,6,8,10 --mc 20 --out results/scaling

Use --objects to keep only the first few objects for a desk-scale run.
"""

import argparse
from pathlib import Path

from searchtrack.config import get_preset
from searchtrack.experiment import sweep_agents
from searchtrack.plots import emit_plots


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario", default="scenario4")
    ap.add_argument("--agents", default="2,4,6,8,10")
    ap.add_argument("--modes", default="v1,v2,vmo")
    ap.add_argument("--mc", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--steps", type=int, default=None)
    ap.add_argument("--objects", type=int, default=None)
    ap.add_argument("--out", type=Path, default=Path("results/scaling"))
    args = ap.parse_args()

    cfg = get_preset(args.scenario)
    if args.objects:
        cfg.objects = cfg.objects[: args.objects]
    if args.steps:
        cfg.steps = args.steps
    cfg.validate()
    rows = sweep_agents(cfg, [int(s) for s in args.agents.split(",")], args.modes.split(","),
                        args.mc, args.seed, args.out)
    for r in rows:
        print(f"S={r['S']:2d} {r['mode']:>3}: {r['ospa_dist']:.2f} ± {r['ospa_dist_se']:.2f}")
    for p in emit_plots(args.out, "scaling"):
        print(p)


if __name__ == "__main__":
    main()
