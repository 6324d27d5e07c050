"""Measure simulations per second per core at the default market size."""

import argparse
import time

import numpy as np

from aimarket.config import MarketConfig
from aimarket.market import evaluate_genes


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--genes", type=int, default=500)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    cfg = MarketConfig()
    genes = np.random.default_rng(0).integers(0, 3, (args.genes, cfg.n_actions)).astype(np.int8)
    evaluate_genes(cfg, 1, genes[:2], args.workers)  # compile + build market context
    t0 = time.perf_counter()
    evaluate_genes(cfg, 1, genes, args.workers)
    rate = args.genes / (time.perf_counter() - t0)
    print(f"{rate:.0f} simulations/s with {args.workers} worker(s)")
    print(f"full GA (1.5e7 simulations): {1.5e7 / rate / 3600:.1f} hours at this rate")


if __name__ == "__main__":
    main()
