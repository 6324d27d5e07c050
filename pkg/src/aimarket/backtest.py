"""No-impact control: score genes against a frozen no-AI-agent price path."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .config import GAConfig, MarketConfig
from .evolve import GAResult, run_ga
from .market import BUY, SELL, check_gene, run_simulation
from .orderbook import format_ticks


@dataclass(frozen=True)
class BaselineQuotes:
    """Quotes the AI agent would face at each slot if it had never traded.

    ``best_bid``/``best_ask`` use 0 for an empty side.
    """

    cfg: MarketConfig
    seed: int
    slot_ticks: np.ndarray
    best_bid: np.ndarray
    best_ask: np.ndarray
    mid: np.ndarray  # mid at each slot tick
    mid_ticks: np.ndarray  # full baseline path, index = tick

    def __post_init__(self):
        for arr in (self.slot_ticks, self.best_bid, self.best_ask, self.mid, self.mid_ticks):
            arr.setflags(write=False)

    def checksum(self) -> str:
        h = hashlib.sha256()
        for arr in (self.slot_ticks, self.best_bid, self.best_ask, self.mid, self.mid_ticks):
            h.update(arr.tobytes())
        return h.hexdigest()

    def to_csv(self, meta: str | None = None) -> str:
        dp = self.cfg.delta_p
        fmt = lambda v: format_ticks(int(v), dp) if v else ""
        lines = [f"# {meta}"] if meta else []
        lines.append("slot,tick,best_bid,best_ask,mid")
        for k, (t, b, a, m) in enumerate(zip(self.slot_ticks, self.best_bid, self.best_ask, self.mid), start=1):
            lines.append(f"{k},{t},{fmt(b)},{fmt(a)},{fmt(m)}")
        return "\n".join(lines) + "\n"


def record_baseline(cfg: MarketConfig, seed: int) -> BaselineQuotes:
    rec = run_simulation(cfg, seed)
    slots = rec.slot_ticks
    return BaselineQuotes(
        cfg=cfg,
        seed=seed,
        slot_ticks=slots.astype(np.int64),
        best_bid=rec.slot_bid.copy(),
        best_ask=rec.slot_ask.copy(),
        mid=rec.mid_ticks[slots].copy(),
        mid_ticks=rec.mid_ticks.copy(),
    )


def backtest_profits(genes, baseline: BaselineQuotes) -> np.ndarray:
    """Profit in ticks for each row of ``genes`` against the frozen quotes."""
    genes = np.atleast_2d(np.asarray(genes, dtype=np.int8))
    if genes.shape[1] != len(baseline.slot_ticks):
        raise ValueError(f"genes must have {len(baseline.slot_ticks)} actions")
    buys = (genes == BUY) & (baseline.best_ask > 0)
    sells = (genes == SELL) & (baseline.best_bid > 0)
    cash = (sells * baseline.best_bid).sum(axis=1) - (buys * baseline.best_ask).sum(axis=1)
    position = buys.sum(axis=1) - sells.sum(axis=1)
    return (cash + position * baseline.cfg.pf_ticks).astype(np.int64)


def evaluate_gene_backtest(gene, baseline: BaselineQuotes) -> float:
    gene = check_gene(gene, len(baseline.slot_ticks))
    return int(backtest_profits(gene[None, :], baseline)[0]) * baseline.cfg.delta_p


def run_ga_backtest(ga_cfg: GAConfig, market_cfg: MarketConfig, seed: int, baseline=None, **kw) -> GAResult:
    baseline = record_baseline(market_cfg, seed) if baseline is None else baseline
    return run_ga(ga_cfg, lambda genes: backtest_profits(genes, baseline), market_cfg.n_actions, **kw)
