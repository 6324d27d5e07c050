"""Simulation loop, AI-agent accounting and simulation records."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np

from . import _engine
from .agents import AgentStream, decision_draws_from_block, profile_from_block
from .config import MarketConfig
from .orderbook import AIA_OWNER, Side, format_ticks

NONE, BUY, SELL = 0, 1, 2
ACTION_CHARS = "NBS"
_CHAR_CODE = {c: i for i, c in enumerate(ACTION_CHARS)}


class GeneError(ValueError):
    pass


def parse_gene(text: str, n_actions: int | None = None) -> np.ndarray:
    """``'BSN...'`` -> int8 array (N=0, B=1, S=2)."""
    text = text.strip()
    for pos, ch in enumerate(text):
        if ch not in _CHAR_CODE:
            raise GeneError(f"invalid action {ch!r} at position {pos}")
    if n_actions is not None and len(text) != n_actions:
        raise GeneError(f"gene has {len(text)} actions, expected {n_actions}")
    return np.array([_CHAR_CODE[c] for c in text], dtype=np.int8)


def gene_to_str(gene) -> str:
    return "".join(ACTION_CHARS[a] for a in np.asarray(gene))


def check_gene(gene, n_actions: int) -> np.ndarray:
    gene = np.ascontiguousarray(gene, dtype=np.int8)
    if gene.ndim != 1 or gene.shape[0] != n_actions:
        raise GeneError(f"gene must have {n_actions} actions, got shape {gene.shape}")
    if gene.size and (gene.min() < 0 or gene.max() > 2):
        raise GeneError("gene actions must be 0 (N), 1 (B) or 2 (S)")
    return gene


class MarketContext:
    """Everything about one market seed that does not depend on the AI agent.

    Agent parameters and every agent's per-order random numbers are laid out
    by tick, so each gene evaluation replays exactly the same normal agents.
    """

    def __init__(self, cfg: MarketConfig, seed: int):
        self.cfg = cfg
        self.seed = seed
        n = cfg.n
        per_agent = (cfg.t_e - 1) // n + 1  # most orders any one agent places
        self.w1 = np.zeros(n + 1)
        self.w2 = np.zeros(n + 1)
        self.w3 = np.zeros(n + 1)
        self.tau = np.zeros(n + 1, dtype=np.int64)
        self.z = np.zeros(cfg.t_e + 1)
        self.u = np.zeros(cfg.t_e + 1)
        self.profiles = []
        for j in range(1, n + 1):
            words = AgentStream(seed, j).blocks(per_agent + 1)
            p = profile_from_block(j, words[0], cfg, seed)
            self.profiles.append(p)
            self.w1[j], self.w2[j], self.w3[j], self.tau[j] = p.w1, p.w2, p.w3, p.tau
            ticks = np.arange(j, cfg.t_e + 1, n)
            z, u = decision_draws_from_block(words[1 : len(ticks) + 1])
            self.z[ticks] = z
            self.u[ticks] = u

    def _args(self):
        c = self.cfg
        return (
            self.w1, self.w2, self.w3, self.tau, self.z, self.u,
            c.n, c.t_c, c.t_e, c.delta_t, c.sigma_eps, c.p_d, c.delta_p, c.p_f, c.pf_ticks,
        )


@lru_cache(maxsize=16)
def market_context(cfg: MarketConfig, seed: int) -> MarketContext:
    return MarketContext(cfg, seed)


@dataclass(frozen=True)
class MarketRecord:
    """Full trace of one simulation. Prices are tick counts."""

    cfg: MarketConfig
    seed: int
    gene: np.ndarray | None
    mid_ticks: np.ndarray  # index 0 = pre-open reference, 1..t_e = end-of-tick mid
    trades: np.ndarray  # (tick, taker_side, price, maker_owner, taker_owner)
    aia_fills: np.ndarray  # (tick, side, price)
    slot_bid: np.ndarray  # best bid just before each AI-agent slot (0 = empty side)
    slot_ask: np.ndarray
    cash_ticks: int
    position: int

    @property
    def profit_ticks(self) -> int:
        return self.cash_ticks + self.position * self.cfg.pf_ticks

    @property
    def profit(self) -> float:
        return self.profit_ticks * self.cfg.delta_p

    @property
    def mid_series(self) -> np.ndarray:
        """Mid prices for ticks 1..t_e."""
        return self.mid_ticks[1:] * self.cfg.delta_p

    @property
    def slot_ticks(self) -> np.ndarray:
        return self.cfg.t_c + self.cfg.delta_t * np.arange(1, self.cfg.n_actions + 1)

    def max_deviation(self, start: int | None = None) -> float:
        """max |mid - P_f| over ticks ``start..t_e`` (default: from t_c on).

        Warm-up mids are excluded by default: the first two-sided quote can
        sit far from P_f and is identical with or without the AI agent.
        """
        start = self.cfg.t_c if start is None else start
        dev = np.abs(self.mid_ticks[max(start, 1) :] - self.cfg.pf_ticks)
        return float(dev.max() * self.cfg.delta_p)

    def summary(self) -> dict:
        return {
            "seed": self.seed,
            "profit": self.profit,
            "profit_ticks": int(self.profit_ticks),
            "final_position": int(self.position),
            "fill_count": int(len(self.aia_fills)),
            "gene": None if self.gene is None else gene_to_str(self.gene),
        }


def run_simulation(cfg: MarketConfig, seed: int, gene=None) -> MarketRecord:
    """One full market run; ``gene=None`` is the no-AI-agent baseline."""
    n_actions = cfg.n_actions
    if gene is not None:
        gene = check_gene(gene, n_actions)
    ctx = market_context(cfg, seed)
    mid = np.empty(cfg.t_e + 1, dtype=np.int64)
    trades = np.empty((cfg.t_e + n_actions, 5), dtype=np.int64)
    fills = np.empty((n_actions, 3), dtype=np.int64)
    sb = np.empty(n_actions, dtype=np.int64)
    sa = np.empty(n_actions, dtype=np.int64)
    g = gene if gene is not None else np.zeros(n_actions, dtype=np.int8)
    n_tr, n_f, cash, pos = _engine.simulate(*ctx._args(), g, gene is not None, mid, trades, fills, sb, sa)
    return MarketRecord(
        cfg=cfg,
        seed=seed,
        gene=None if gene is None else gene.copy(),
        mid_ticks=mid,
        trades=trades[:n_tr].copy(),
        aia_fills=fills[:n_f].copy(),
        slot_bid=sb,
        slot_ask=sa,
        cash_ticks=int(cash),
        position=int(pos),
    )


def evaluate_gene(cfg: MarketConfig, seed: int, gene) -> float:
    return run_simulation(cfg, seed, gene).profit


def evaluate_genes(cfg: MarketConfig, seed: int, genes, workers: int = 0) -> np.ndarray:
    """Profits in ticks for a ``(count, n_actions)`` block of genes.

    ``workers`` caps the compiled thread pool (0 = all). Output is indexed by
    row, so the result does not depend on the worker count.
    """
    genes = np.ascontiguousarray(genes, dtype=np.int8)
    if genes.ndim != 2 or genes.shape[1] != cfg.n_actions:
        raise GeneError(f"genes must have shape (count, {cfg.n_actions}), got {genes.shape}")
    if genes.size and (genes.min() < 0 or genes.max() > 2):
        raise GeneError("gene actions must be 0 (N), 1 (B) or 2 (S)")
    ctx = market_context(cfg, seed)
    previous = numba.get_num_threads()
    numba.set_num_threads(workers or numba.config.NUMBA_NUM_THREADS)
    try:
        return _engine.batch_profit(*ctx._args(), genes)
    finally:
        numba.set_num_threads(previous)


def aggregate_volume(record: MarketRecord, bucket: int = 200) -> np.ndarray:
    """Signed AI-agent volume per bucket: rows of (bucket_start, buys - sells).

    Bucket ``b`` covers ticks ``b*bucket+1 .. (b+1)*bucket`` so ticks 1..t_e
    split into ``ceil(t_e / bucket)`` buckets; the last one may be partial.
    """
    if bucket <= 0:
        raise ValueError("bucket must be positive")
    n_buckets = -(-record.cfg.t_e // bucket)
    vol = np.zeros(n_buckets, dtype=np.int64)
    if len(record.aia_fills):
        idx = (record.aia_fills[:, 0] - 1) // bucket
        sign = np.where(record.aia_fills[:, 1] == BUY, 1, -1)
        np.add.at(vol, idx, sign)
    return np.column_stack([np.arange(n_buckets) * bucket, vol])


def verify_accounting(record: MarketRecord) -> int:
    """Profit recomputed from the fill log alone (ticks)."""
    f = record.aia_fills
    buys = f[f[:, 1] == BUY, 2].sum()
    sells = f[f[:, 1] == SELL, 2].sum()
    position = int((f[:, 1] == BUY).sum() - (f[:, 1] == SELL).sum())
    return int(sells - buys + position * record.cfg.pf_ticks)


# --- exports -----------------------------------------------------------------


def _csv(header, rows, meta: str | None) -> str:
    buf = io.StringIO()
    if meta:
        buf.write(f"# {meta}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def mid_csv(record: MarketRecord, meta: str | None = None) -> str:
    dp = record.cfg.delta_p
    rows = ((t, format_ticks(int(m), dp)) for t, m in enumerate(record.mid_ticks[1:], start=1))
    return _csv(["tick", "mid"], rows, meta)


def volume_csv(record: MarketRecord, bucket: int = 200, meta: str | None = None) -> str:
    return _csv(["bucket_start", "signed_volume"], aggregate_volume(record, bucket).tolist(), meta)


def trades_csv(record: MarketRecord, meta: str | None = None) -> str:
    dp = record.cfg.delta_p
    rows = (
        (int(t), Side(int(s)).name.lower(), format_ticks(int(p), dp), int(mk), int(tk))
        for t, s, p, mk, tk in record.trades
    )
    return _csv(["tick", "taker_side", "price", "maker_owner", "taker_owner"], rows, meta)


def summary_json(record: MarketRecord, extra: dict | None = None) -> str:
    doc = record.summary()
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


__all__ = [
    "AIA_OWNER",
    "BUY",
    "GeneError",
    "MarketContext",
    "MarketRecord",
    "NONE",
    "SELL",
    "aggregate_volume",
    "evaluate_gene",
    "evaluate_genes",
    "gene_to_str",
    "market_context",
    "mid_csv",
    "parse_gene",
    "run_simulation",
    "summary_json",
    "trades_csv",
    "verify_accounting",
    "volume_csv",
]
