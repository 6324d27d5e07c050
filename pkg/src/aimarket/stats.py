"""Stylized facts of simulated returns: fat tails and volatility clustering."""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import MarketConfig
from .market import run_simulation

log = logging.getLogger(__name__)

# reference values reported for the original model (std as a fraction, not percent)
REFERENCE = {
    "std_returns": 1.03e-4,
    "kurtosis": 11.54,
    "acf_sq": [0.081, 0.041, 0.032, 0.047, 0.018],
}


class DegenerateSeries(ValueError):
    pass


def compute_returns(mid_series, interval: int = 100, window=None, warmup: int | None = None) -> np.ndarray:
    """Non-overlapping log returns of ``mid_series`` sampled every ``interval`` ticks.

    ``mid_series[t]`` is the price at tick ``t``.  ``window=(start, end)`` is
    inclusive; samples are taken at ``start, start+interval, ...`` up to
    ``end``.  With ``warmup`` given, a window lying wholly before it is refused.
    """
    prices = np.asarray(mid_series, dtype=float)
    if interval < 1:
        raise ValueError("interval must be >= 1")
    start, end = (1, len(prices) - 1) if window is None else window
    if not 0 <= start <= end < len(prices):
        raise ValueError(f"window {window} outside series of length {len(prices)}")
    if warmup is not None and end < warmup:
        raise ValueError("window lies entirely in the warm-up period")
    samples = prices[start : end + 1 : interval]
    if len(samples) < 2:
        raise ValueError("need at least two sample points")
    return np.diff(np.log(samples))


def excess_kurtosis(x) -> float:
    x = np.asarray(x, dtype=float)
    if len(x) < 4:
        raise ValueError("need at least 4 values")
    d = x - x.mean()
    m2 = np.mean(d**2)
    if m2 <= 0 or m2 < 1e-30 * max(1.0, np.mean(x**2)):
        raise DegenerateSeries("zero variance")
    return float(np.mean(d**4) / m2**2 - 3.0)


def acf_squared(x, lags=range(1, 6)) -> np.ndarray:
    """Sample autocorrelation of squared values at each lag."""
    sq = np.asarray(x, dtype=float) ** 2
    lags = list(lags)
    if len(sq) <= max(lags) + 1:
        raise ValueError(f"series too short for lag {max(lags)}")
    d = sq - sq.mean()
    denom = np.dot(d, d)
    if denom <= 0:
        raise DegenerateSeries("squared series has zero variance")
    return np.array([np.dot(d[:-k], d[k:]) / denom for k in lags])


@dataclass
class StylizedReport:
    std_returns: float
    kurtosis: float
    acf_sq: list
    n_runs: int
    seeds: list = field(default_factory=list)
    excluded: dict = field(default_factory=dict)
    interval: int = 100

    def to_json(self, **extra) -> str:
        doc = asdict(self) | {"reference": REFERENCE} | extra
        return json.dumps(doc, indent=2) + "\n"

    def table_csv(self, meta: str | None = None) -> str:
        """Rows shaped like the familiar returns-statistics table."""
        lines = [f"# {meta}"] if meta else []
        lines.append("statistic,lag,value,reference")
        lines.append(f"std_returns_percent,,{self.std_returns * 100:.6g},{REFERENCE['std_returns'] * 100:.6g}")
        lines.append(f"kurtosis,,{self.kurtosis:.6g},{REFERENCE['kurtosis']}")
        for lag, (v, ref) in enumerate(zip(self.acf_sq, REFERENCE["acf_sq"]), start=1):
            lines.append(f"acf_squared_returns,{lag},{v:.6g},{ref}")
        return "\n".join(lines) + "\n"


def run_statistics(cfg: MarketConfig, seed: int, interval: int = 100):
    rec = run_simulation(cfg, seed)
    r = compute_returns(rec.mid_ticks * cfg.delta_p, interval, window=(cfg.t_c + 1, cfg.t_e), warmup=cfg.t_c)
    return float(r.std()), excess_kurtosis(r), acf_squared(r)


def stylized_report(cfg: MarketConfig, seeds, interval: int = 100) -> StylizedReport:
    """Per-seed no-AI-agent statistics averaged over ``seeds``.

    Seeds whose return series is degenerate are listed in ``excluded`` and a
    warning is issued.
    """
    seeds = list(seeds)
    if len(seeds) < 1:
        raise ValueError("need at least one seed")
    rows, used, excluded = [], [], {}
    for s in seeds:
        try:
            rows.append(run_statistics(cfg, s, interval))
            used.append(s)
        except DegenerateSeries as exc:
            excluded[s] = str(exc)
            warnings.warn(f"seed {s} excluded from report: {exc}", stacklevel=2)
    if not rows:
        raise DegenerateSeries("every run was degenerate")
    return StylizedReport(
        std_returns=float(np.mean([r[0] for r in rows])),
        kurtosis=float(np.mean([r[1] for r in rows])),
        acf_sq=[float(v) for v in np.mean([r[2] for r in rows], axis=0)],
        n_runs=len(rows),
        seeds=used,
        excluded=excluded,
        interval=interval,
    )
