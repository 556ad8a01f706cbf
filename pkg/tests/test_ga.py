from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nidwca.engine import EvolutionParams
from nidwca.errors import DatasetError, DimensionError
from nidwca.ga import (GaConfig, crossover, evolve_population, fitness, mutate,
                       random_chromosome, unlabeled_purity)
from nidwca.rules import N_GENES, RuleVector

FAST = EvolutionParams(quantization_eps=1 / 8)


def small_config(**kw):
    base = dict(population_size=12, generations=4, seed=3)
    base.update(kw)
    return GaConfig(**base)


def test_random_chromosome():
    c = random_chromosome(4, seed=1)
    assert c.n_cells == 4
    assert all(0 <= g < N_GENES for g in c.genes)
    assert random_chromosome(4, 1) == c
    with pytest.raises(DimensionError):
        random_chromosome(0, 1)


def test_crossover_examples():
    a = RuleVector.from_numbers([238, 254, 238, 252])
    b = RuleVector.from_numbers([170, 204, 240, 250])
    c1, c2 = crossover(a, b, 2)
    assert c1.numbers == (238, 254, 240, 250)
    assert c2.numbers == (170, 204, 238, 252)
    assert crossover(a, a, 3) == (a, a)
    with pytest.raises(IndexError):
        crossover(a, b, 4)
    with pytest.raises(DimensionError):
        crossover(a, RuleVector.from_numbers([0, 0]), 1)


@given(seed=st.integers(0, 2**32), n=st.integers(1, 41))
def test_mutate_rates(seed, n):
    c = random_chromosome(n, seed)
    assert mutate(c, 0.0, seed) == c
    full = mutate(c, 1.0, seed)
    assert all(x != y for x, y in zip(full.genes, c.genes))
    assert mutate(c, 0.05, seed) == mutate(c, 0.05, seed)


@given(seed=st.integers(0, 2**32))
def test_crossover_closure(seed):
    rng = np.random.default_rng(seed)
    a, b = random_chromosome(6, seed), random_chromosome(6, seed + 1)
    cut = int(rng.integers(1, 6))
    for child in crossover(a, b, cut):
        assert child.n_cells == 6
        for i, g in enumerate(child.genes):
            assert g in (a.genes[i], b.genes[i])


def test_fitness_single_impure_basin():
    states = np.random.default_rng(0).random((10, 3))
    labels = np.array([1] * 8 + [0] * 2)
    score = fitness(RuleVector.from_numbers([0, 0, 0]), (states, labels),
                    GaConfig(target_basins_k=1))
    assert score.basin_count == 1
    assert score.purity == pytest.approx(0.8)
    assert score.total == pytest.approx(0.8)


def test_fitness_two_pure_basins():
    states = np.array([[0.0]] * 5 + [[1.0]] * 5)
    labels = np.array([0] * 5 + [1] * 5)
    score = fitness(RuleVector.from_numbers([204]), (states, labels), GaConfig(target_basins_k=2))
    assert (score.purity, score.basin_count, score.penalty, score.total) == (1.0, 2, 0.0, 1.0)


def test_fitness_penalty_at_twice_k():
    states = np.array([[0.0], [0.25], [0.5], [1.0]] * 3)
    labels = np.array([0, 1, 0, 1] * 3)
    score = fitness(RuleVector.from_numbers([204]), (states, labels), GaConfig(target_basins_k=2))
    assert score.basin_count == 4
    assert score.penalty == 1.0
    assert score.total == pytest.approx(score.purity - 0.1)


def test_fitness_errors():
    with pytest.raises(DatasetError):
        fitness(RuleVector.from_numbers([204]), (np.empty((0, 1)), None), GaConfig())
    with pytest.raises(DatasetError):
        fitness(RuleVector.from_numbers([204]), [(np.array([0.1]), "attack"), np.array([0.2])],
                GaConfig())


def test_overflow_basin_earns_no_purity():
    # complemented identity oscillates with period 2, longer than max_cycle_len=1
    states = np.array([[0.125], [0.25]] * 4)
    labels = np.ones(8, dtype=np.int8)
    p = EvolutionParams(max_steps=8, max_cycle_len=1)
    score = fitness(RuleVector.from_numbers([51]), (states, labels), GaConfig(target_basins_k=1), p)
    assert score.purity == 0.0


def test_unlabeled_purity():
    assert unlabeled_purity([50, 50], 2) == pytest.approx(1.0)
    assert unlabeled_purity([100], 2) == pytest.approx(1 - np.log(2) / np.log(100))
    assert 0.0 <= unlabeled_purity([1] * 99 + [1], 2) <= 1.0


def test_config_validation():
    with pytest.raises(ValueError):
        GaConfig(population_size=1)
    with pytest.raises(ValueError):
        GaConfig(elitism_count=100, population_size=10)
    with pytest.raises(ValueError):
        GaConfig(target_basins_k=0)


def test_generations_zero(small_separable):
    cfg = small_config(generations=0)
    best, hist = evolve_population(small_separable, 41, cfg, FAST)
    assert len(hist) == 1
    assert hist[0].best == fitness(best, small_separable, cfg, FAST)


def test_ga_determinism_and_monotone(small_separable):
    cfg = small_config()
    b1, h1 = evolve_population(small_separable, 41, cfg, FAST)
    b2, h2 = evolve_population(small_separable, 41, cfg, FAST)
    assert b1 == b2
    assert [h.as_dict() for h in h1] == [h.as_dict() for h in h2]
    best = [h.best_so_far.total for h in h1]
    assert all(x <= y for x, y in zip(best, best[1:]))
    assert best[-1] >= h1[0].best.total


def test_ga_backends_agree(small_separable):
    cfg = small_config(generations=2)
    a = evolve_population(small_separable, 41, cfg, FAST, backend="numba")
    b = evolve_population(small_separable, 41, cfg, FAST, backend="numpy")
    assert a[0] == b[0]


def test_concurrent_fitness_matches_sequential(small_separable):
    cfg = GaConfig()
    pop = [random_chromosome(41, s) for s in range(8)]
    seq = [fitness(c, small_separable, cfg, FAST) for c in pop]
    with ThreadPoolExecutor(4) as ex:
        par = list(ex.map(lambda c: fitness(c, small_separable, cfg, FAST), pop))
    assert seq == par


def test_dimension_mismatch(small_separable):
    with pytest.raises(DimensionError):
        evolve_population(small_separable, 40, small_config(), FAST)
