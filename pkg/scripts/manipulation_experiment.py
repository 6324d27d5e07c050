"""Impact vs backtest training over several seeds, plus price/volume data for one seed.

Reduced scale by default; pass --population 10000 --elites 400 --generations 1500
for the full-size run (use `aimarket evolve` with checkpoints for that).
"""

import argparse
import json
from pathlib import Path

from aimarket.config import GAConfig, MarketConfig
from aimarket.experiment import compare
from aimarket.market import mid_csv, parse_gene, run_simulation, volume_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, nargs="+", default=list(range(1, 11)))
    ap.add_argument("--population", type=int, default=200)
    ap.add_argument("--elites", type=int, default=8)
    ap.add_argument("--generations", type=int, default=50)
    ap.add_argument("--ga-seed", type=int, default=0)
    ap.add_argument("--out", default="runs/manipulation")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = MarketConfig()
    ga = GAConfig(population=args.population, elites=args.elites, generations=args.generations, ga_seed=args.ga_seed)

    runs = []
    for s in args.seeds:
        r = compare(ga, cfg, s)
        d = r["diagnostics"]["impact"]
        print(
            f"seed {s}: impact-trained {r['matrix']['impact']['impact']:.2f}, "
            f"backtest-trained (with impact) {r['matrix']['backtest']['impact']:.2f}, "
            f"max|mid-P_f| {d['max_dev_baseline']:.2f} -> {d['max_dev_with_aia']:.2f}"
        )
        runs.append(r)
    (out / "compare.json").write_text(json.dumps(runs, indent=2) + "\n")

    first = runs[0]
    for mode in ("impact", "backtest"):
        rec = run_simulation(cfg, first["seed"], parse_gene(first["genes"][mode]))
        (out / f"mid_{mode}.csv").write_text(mid_csv(rec))
        (out / f"volume_{mode}.csv").write_text(volume_csv(rec))
    (out / "mid_baseline.csv").write_text(mid_csv(run_simulation(cfg, first["seed"])))


if __name__ == "__main__":
    main()
