"""Paired impact/backtest experiment and manipulation diagnostics."""

from __future__ import annotations

import numpy as np

from .backtest import backtest_profits, record_baseline, run_ga_backtest
from .config import GAConfig, MarketConfig
from .evolve import run_ga_impact
from .market import aggregate_volume, evaluate_genes, gene_to_str, run_simulation


def pump_then_dump(volume) -> bool:
    """True if some net-buy bucket comes before some net-sell bucket."""
    v = np.asarray(volume)
    buys = np.flatnonzero(v > 0)
    sells = np.flatnonzero(v < 0)
    return bool(len(buys) and len(sells) and buys[0] < sells[-1])


def diagnostics(cfg: MarketConfig, seed: int, gene, bucket: int = 200) -> dict:
    rec = run_simulation(cfg, seed, gene)
    base = run_simulation(cfg, seed)
    vol = aggregate_volume(rec, bucket)[:, 1]
    return {
        "max_dev_baseline": base.max_deviation(),
        "max_dev_with_aia": rec.max_deviation(),
        "volume_buckets": vol.tolist(),
        "pump_then_dump": pump_then_dump(vol),
        "final_position": rec.position,
    }


def compare(ga_cfg: GAConfig, cfg: MarketConfig, seed: int, workers: int = 0, bucket: int = 200) -> dict:
    """Train under both conditions on ``seed`` and score each gene both ways."""
    baseline = record_baseline(cfg, seed)
    impact = run_ga_impact(ga_cfg, cfg, seed, workers)
    back = run_ga_backtest(ga_cfg, cfg, seed, baseline=baseline)
    control = np.zeros(cfg.n_actions, dtype=np.int8)
    genes = np.stack([impact.best_gene, back.best_gene, control])
    with_impact = evaluate_genes(cfg, seed, genes, workers) * cfg.delta_p
    no_impact = backtest_profits(genes, baseline) * cfg.delta_p
    matrix = {
        name: {"impact": float(with_impact[i]), "backtest": float(no_impact[i])}
        for i, name in enumerate(("impact", "backtest", "none"))
    }
    return {
        "seed": seed,
        "ga_seed": ga_cfg.ga_seed,
        "matrix": matrix,
        "train_fitness": {"impact": impact.best_fitness * cfg.delta_p, "backtest": back.best_fitness * cfg.delta_p},
        "genes": {"impact": gene_to_str(impact.best_gene), "backtest": gene_to_str(back.best_gene)},
        "diagnostics": {
            "impact": diagnostics(cfg, seed, impact.best_gene, bucket),
            "backtest": diagnostics(cfg, seed, back.best_gene, bucket),
        },
        "history": {"impact": [h[1] for h in impact.history], "backtest": [h[1] for h in back.history]},
    }
