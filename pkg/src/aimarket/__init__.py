"""Artificial market simulator with a genetic-algorithm trading agent."""

from .config import ExperimentConfig, GAConfig, MarketConfig
from .market import MarketRecord, evaluate_gene, evaluate_genes, run_simulation

__all__ = [
    "ExperimentConfig",
    "GAConfig",
    "MarketConfig",
    "MarketRecord",
    "evaluate_gene",
    "evaluate_genes",
    "run_simulation",
]
__version__ = "0.1.0"
