"""Genetic algorithm over AI-agent action sequences.

Fitness is AI-agent profit in ticks (exact integers).  All GA randomness
comes from one PCG64 generator seeded by ``ga_seed``, which never touches
the market streams.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import GAConfig, MarketConfig
from .market import evaluate_genes

log = logging.getLogger(__name__)

Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass
class Population:
    generation: int
    members: np.ndarray  # (N_g, N_t) int8
    fitness: np.ndarray  # (N_g,) int64 profit in ticks
    evaluated: np.ndarray  # (N_g,) bool

    @classmethod
    def fresh(cls, generation, members):
        count = len(members)
        return cls(generation, members, np.zeros(count, dtype=np.int64), np.zeros(count, dtype=bool))

    def ranking(self) -> np.ndarray:
        """Member indices by descending fitness, ties to the lower index."""
        if not self.evaluated.all():
            raise ValueError("population has unevaluated members")
        return np.argsort(-self.fitness, kind="stable")

    def best(self):
        i = self.ranking()[0]
        return self.members[i].copy(), int(self.fitness[i])


@dataclass
class GAResult:
    best_gene: np.ndarray
    best_fitness: int
    history: list = field(default_factory=list)  # (generation, best, mean, median, elapsed) in ticks
    population: Population | None = None


def ga_rng(cfg: GAConfig) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(cfg.ga_seed))


def init_population(
    cfg: GAConfig, n_actions: int, rng: np.random.Generator | None = None, size: int | None = None
) -> Population:
    """Uniform random genes; ``size`` overrides ``cfg.population``."""
    rng = ga_rng(cfg) if rng is None else rng
    count = cfg.population if size is None else size
    members = rng.integers(0, 3, size=(count, n_actions), dtype=np.int8)
    return Population.fresh(0, members)


def evaluate_population(pop: Population, evaluate: Evaluator) -> Population:
    """Fill in fitness for members that lack it; elites keep their cached value."""
    todo = np.flatnonzero(~pop.evaluated)
    if len(todo):
        pop.fitness[todo] = evaluate(pop.members[todo])
        pop.evaluated[todo] = True
    return pop


def market_evaluator(cfg: MarketConfig, seed: int, workers: int = 0) -> Evaluator:
    return lambda genes: evaluate_genes(cfg, seed, genes, workers)


def crossover(g0, g1, i0: int, i1: int) -> np.ndarray:
    """Copy of ``g0`` with positions ``i0..i1`` (inclusive) taken from ``g1``."""
    n = len(g0)
    if len(g1) != n:
        raise ValueError("parents differ in length")
    if not 0 <= i0 <= i1 < n:
        raise ValueError(f"need 0 <= i0 <= i1 < {n}, got {i0}, {i1}")
    child = np.array(g0, dtype=np.int8, copy=True)
    child[i0 : i1 + 1] = g1[i0 : i1 + 1]
    return child


def next_generation(pop: Population, cfg: GAConfig, rng: np.random.Generator) -> Population:
    order = pop.ranking()
    members = pop.members[order].copy()
    fitness = pop.fitness[order].copy()
    n_elite = min(cfg.elites, len(members))
    n_actions = members.shape[1]
    elites = members[:n_elite].copy()

    for slot in range(n_elite, len(members)):
        if rng.random() < cfg.crossover_prob:
            a, b = rng.choice(n_elite, size=2, replace=False)
            i0, i1 = sorted(rng.integers(0, n_actions, size=2))
            members[slot] = crossover(elites[a], elites[b], int(i0), int(i1))

    rest = members[n_elite:]
    mask = rng.random(rest.shape) < cfg.mutation_prob
    redraw = rng.integers(0, 3, size=rest.shape, dtype=np.int8)
    rest[mask] = redraw[mask]

    evaluated = np.zeros(len(members), dtype=bool)
    evaluated[:n_elite] = True
    fitness[n_elite:] = 0
    return Population(pop.generation + 1, members, fitness, evaluated)


def _stats_row(pop: Population, elapsed: float):
    f = pop.fitness
    return (pop.generation, int(f.max()), float(f.mean()), float(np.median(f)), elapsed)


def run_ga(
    cfg: GAConfig,
    evaluate: Evaluator,
    n_actions: int,
    *,
    resume=None,
    on_generation: Callable | None = None,
) -> GAResult:
    """Evaluate, record, breed; ``cfg.generations`` times, then evaluate the last.

    ``resume`` is a ``(population, rng, history)`` triple from a checkpoint
    taken right after a generation was evaluated.  ``on_generation`` is
    called as ``on_generation(population, rng, history)`` at the same point.
    """
    start = time.perf_counter()
    if resume is None:
        rng = ga_rng(cfg)
        pop = evaluate_population(init_population(cfg, n_actions, rng), evaluate)
        history = [_stats_row(pop, time.perf_counter() - start)]
        if on_generation:
            on_generation(pop, rng, history)
    else:
        pop, rng, history = resume
        history = list(history)
        start -= history[-1][4] if history else 0.0

    while pop.generation < cfg.generations:
        pop = evaluate_population(next_generation(pop, cfg, rng), evaluate)
        history.append(_stats_row(pop, time.perf_counter() - start))
        log.info("generation %d best %d mean %.1f", *history[-1][:3])
        if on_generation:
            on_generation(pop, rng, history)

    best_gene, best_fitness = pop.best()
    return GAResult(best_gene, best_fitness, history, pop)


def run_ga_impact(ga_cfg: GAConfig, market_cfg: MarketConfig, seed: int, workers: int = 0, **kw) -> GAResult:
    return run_ga(ga_cfg, market_evaluator(market_cfg, seed, workers), market_cfg.n_actions, **kw)
