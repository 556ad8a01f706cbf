"""Generational GA over FCA rule vectors.

Fitness rewards basin purity (labeled data) or a basin-size distribution
close to ``k`` equal basins (unlabeled data), minus a penalty for the
empirical basin count straying from ``target_basins_k``.

Every random draw comes from a generator seeded by ``derive_seed(seed,
generation, index)``, so results do not depend on evaluation order.
"""
import math
from dataclasses import asdict, dataclass

import numpy as np

from .dataset import as_arrays
from .engine import EvolutionParams, evolve_many, group_rows
from .errors import DatasetError, DimensionError
from .rules import N_GENES, RuleVector


def derive_seed(*parts):
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 64
    generations: int = 50
    crossover_rate: float = 0.9
    mutation_rate: float = 0.05
    elitism_count: int = 2
    tournament_size: int = 3
    target_basins_k: int = 2
    basin_penalty_weight: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 1 or self.generations < 0:
            raise ValueError("population_size must be positive and generations non-negative")
        if not 0.0 <= self.crossover_rate <= 1.0 or not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("crossover_rate and mutation_rate must lie in [0, 1]")
        if not 0 <= self.elitism_count < self.population_size:
            raise ValueError("elitism_count must be in [0, population_size)")
        if not 1 <= self.tournament_size <= self.population_size:
            raise ValueError("tournament_size must be in [1, population_size]")
        if self.target_basins_k < 1:
            raise ValueError("target_basins_k must be positive")
        if self.basin_penalty_weight < 0:
            raise ValueError("basin_penalty_weight must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class FitnessScore:
    purity: float
    basin_count: int
    penalty: float
    total: float


def random_chromosome(n_cells, seed):
    if n_cells < 1:
        raise DimensionError("a chromosome needs at least one cell")
    rng = np.random.default_rng(seed)
    return RuleVector.from_genes(rng.integers(0, N_GENES, size=n_cells))


def crossover(a, b, cut):
    if len(a) != len(b):
        raise DimensionError(f"parents differ in length ({len(a)} vs {len(b)})")
    if not 1 <= cut < len(a):
        raise IndexError(f"cut {cut} outside [1, {len(a) - 1}]")
    return (RuleVector(a.rules[:cut] + b.rules[cut:]),
            RuleVector(b.rules[:cut] + a.rules[cut:]))


def mutate(c, rate, seed):
    if not 0.0 <= rate <= 1.0:
        raise ValueError("mutation rate must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    genes = c.genes
    hit = rng.random(genes.shape[0]) < rate
    # shifting by 1..15 modulo 16 draws uniformly among the other genes
    shifted = (genes + rng.integers(1, N_GENES, size=genes.shape[0])) % N_GENES
    return RuleVector.from_genes(np.where(hit, shifted, genes))


def score_basins(keys, labels, config):
    """FitnessScore of a basin assignment given as one key row per record."""
    n = keys.shape[0]
    inverse, counts = group_rows(keys)
    basin_count = int(counts.shape[0])
    if labels is not None:
        attacks = np.bincount(inverse, weights=labels, minlength=basin_count).astype(np.int64)
        majority = np.maximum(attacks, counts - attacks)
        # the overflow basin holds no attractor information and earns no purity
        overflow = keys[:, -1] == -1
        if overflow.any():
            majority[inverse[np.argmax(overflow)]] = 0
        purity = float(majority.sum()) / n
    else:
        purity = unlabeled_purity(counts, config.target_basins_k)
    k = config.target_basins_k
    penalty = abs(basin_count - k) / k
    return FitnessScore(purity, basin_count, penalty,
                        purity - config.basin_penalty_weight * penalty)


def unlabeled_purity(counts, k):
    """1 minus the distance of the basin-size entropy from ln(k), scaled by ln(N)."""
    n = int(np.sum(counts))
    if n < 2:
        return 1.0
    p = np.asarray(counts, dtype=np.float64) / n
    entropy = float(-(p * np.log(p)).sum())
    return max(0.0, 1.0 - abs(entropy - math.log(k)) / math.log(n))


def fitness(c, dataset, config, evolution=EvolutionParams(), backend=None):
    states, labels = as_arrays(dataset)
    if states.shape[0] == 0:
        raise DatasetError("fitness needs a non-empty dataset")
    evo = evolve_many(states, c, evolution, backend)
    return score_basins(evo.keys(), labels, config)


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best: FitnessScore
    mean_total: float
    best_so_far: FitnessScore
    best_so_far_genes: tuple

    def as_dict(self):
        d = asdict(self)
        d["best_so_far_genes"] = list(self.best_so_far_genes)
        return d


class _Evaluator:
    def __init__(self, states, labels, config, evolution, backend):
        self.states, self.labels = states, labels
        self.config, self.evolution, self.backend = config, evolution, backend
        self.cache = {}

    def __call__(self, c):
        key = c.genes.tobytes()
        hit = self.cache.get(key)
        if hit is None:
            evo = evolve_many(self.states, c, self.evolution, self.backend)
            hit = self.cache[key] = score_basins(evo.keys(), self.labels, self.config)
        return hit


def _tournament(rng, totals, size):
    picks = rng.integers(0, totals.shape[0], size=size)
    # highest total wins, ties to the lower population index
    return int(min(picks, key=lambda i: (-totals[i], i)))


def evolve_population(dataset, n_cells, config, evolution=EvolutionParams(), backend=None):
    """Run the GA; returns ``(best chromosome, per-generation history)``."""
    states, labels = as_arrays(dataset)
    if states.shape[0] == 0:
        raise DatasetError("cannot evolve on an empty dataset")
    if states.shape[1] != n_cells:
        raise DimensionError(f"records have {states.shape[1]} cells, expected {n_cells}")
    evaluate = _Evaluator(states, labels, config, evolution, backend)
    seed = config.seed
    pop = [random_chromosome(n_cells, derive_seed(seed, 0, i))
           for i in range(config.population_size)]

    best, best_score, history, totals = None, None, [], None
    for gen in range(config.generations + 1):
        if gen > 0:
            pop = _next_generation(pop, totals, config, gen, n_cells)
        scores = [evaluate(c) for c in pop]
        totals = np.array([s.total for s in scores])
        i_best = int(np.argmax(totals))
        if best_score is None or scores[i_best].total > best_score.total:
            best, best_score = pop[i_best], scores[i_best]
        history.append(GenerationStats(gen, scores[i_best], float(totals.mean()),
                                       best_score, tuple(int(g) for g in best.genes)))
    return best, history


def _next_generation(pop, totals, config, gen, n_cells):
    order = sorted(range(len(pop)), key=lambda i: (-totals[i], i))
    children = [pop[i] for i in order[:config.elitism_count]]
    pair = 0
    while len(children) < config.population_size:
        rng = np.random.default_rng(derive_seed(config.seed, gen, pair))
        a = pop[_tournament(rng, totals, config.tournament_size)]
        b = pop[_tournament(rng, totals, config.tournament_size)]
        if n_cells > 1 and rng.random() < config.crossover_rate:
            a, b = crossover(a, b, int(rng.integers(1, n_cells)))
        s1, s2 = rng.integers(0, 2**63, size=2)
        children.append(mutate(a, config.mutation_rate, s1))
        if len(children) < config.population_size:
            children.append(mutate(b, config.mutation_rate, s2))
        pair += 1
    return children
