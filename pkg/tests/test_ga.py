import dataclasses

import numpy as np
import pytest
from scipy import stats

from bridgeopt.benchmarks import NormalizedSphere
from bridgeopt.exceptions import ConfigError
from bridgeopt.ga import mutate, next_generation, run_ga, tournament_select, uniform_crossover, validate_ga_config
from bridgeopt.models import CMAESConfig, GAConfig

SMALL = GAConfig(population_size=6, generations=5, seed=3, log_every=0)


class RecordingEvaluator:
    def __init__(self, inner):
        self.inner = inner
        self.seen = []

    def __call__(self, genes):
        self.seen.append(np.array(genes, copy=True))
        return self.inner(genes)


def test_worst_of_two_wins_a_three_way_tournament_one_time_in_eight():
    rng = np.random.default_rng(0)
    fitnesses = np.array([1.0, 2.0])
    wins = sum(tournament_select(fitnesses, 3, rng) == 0 for _ in range(100_000))
    assert wins / 100_000 == pytest.approx(0.125, abs=0.01)


def test_huge_tournament_returns_the_best(rng):
    fitnesses = rng.random(10)
    assert tournament_select(fitnesses, 200, rng) == int(np.argmax(fitnesses))


def test_tournament_ties_go_to_the_lowest_drawn_index():
    fitnesses = np.ones(20)
    for seed in range(50):
        winner = tournament_select(fitnesses, 4, np.random.default_rng(seed))
        draws = np.random.default_rng(seed).integers(0, 20, size=4)
        assert winner == draws.min()


def test_crossover_extremes(rng):
    a, b = np.arange(22.0), -np.arange(22.0) - 1.0
    c1, c2 = uniform_crossover(a, b, 0.0, rng)
    np.testing.assert_array_equal(c1, a)
    np.testing.assert_array_equal(c2, b)
    c1, c2 = uniform_crossover(a, b, 1.0, rng)
    np.testing.assert_array_equal(c1, b)
    np.testing.assert_array_equal(c2, a)


def test_crossover_conserves_parental_genes(rng):
    a, b = np.arange(22.0), 100.0 + np.arange(22.0)
    for _ in range(10_000):
        c1, c2 = uniform_crossover(a, b, 0.5, rng)
        assert np.all((c1 == a) | (c1 == b))
        np.testing.assert_array_equal(c1 + c2, a + b)


def test_mutation_rate_zero_is_identity(domains, rng):
    genes = domains.sample_uniform(rng)
    np.testing.assert_array_equal(mutate(genes, 0.0, rng, domains), genes)


def test_full_mutation_resamples_uniformly(domains, rng):
    genes = domains.midpoint()
    samples = np.array([mutate(genes, 1.0, rng, domains) for _ in range(10_000)])
    for i in range(len(domains)):
        result = stats.kstest(samples[:, i], "uniform", args=(domains.lower[i], domains.span[i]))
        # 0.01 level, Bonferroni-corrected over the genes
        assert result.pvalue > 0.01 / len(domains)


def test_mutation_stays_in_domain(domains, rng):
    for _ in range(500):
        assert domains.is_within(mutate(domains.sample_uniform(rng), 0.3, rng, domains))


def test_next_generation_keeps_the_elite(domains, rng):
    cfg = GAConfig(population_size=7, elite_size=2)
    population = np.array([domains.sample_uniform(rng) for _ in range(7)])
    fitnesses = np.array([0.3, 2.5, 1.0, 2.5, 0.1, 0.2, 0.9])
    offspring = next_generation(population, fitnesses, cfg, rng, domains)
    assert offspring.shape == population.shape
    np.testing.assert_array_equal(offspring[0], population[1])
    np.testing.assert_array_equal(offspring[1], population[3])
    assert all(domains.is_within(child) for child in offspring)


def test_run_uses_exactly_the_budget(domains):
    evaluator = RecordingEvaluator(NormalizedSphere(domains))
    log = run_ga(SMALL, evaluator, domains=domains)
    assert len(log.records) == SMALL.generations
    assert log.evaluations == SMALL.evaluations == len(evaluator.seen)
    assert [r.evals_used for r in log.records] == [6 * (g + 1) for g in range(5)]
    assert all(domains.is_within(genes) for genes in evaluator.seen)


def test_best_so_far_never_decreases(domains):
    log = run_ga(dataclasses.replace(SMALL, generations=50), NormalizedSphere(domains), domains=domains)
    best = [r.best_fitness for r in log.records]
    assert best == sorted(best)
    assert log.best_genes is not None and domains.is_within(log.best_genes)


def test_run_is_deterministic(domains):
    sphere = NormalizedSphere(domains)
    first = run_ga(SMALL, sphere, domains=domains)
    again = run_ga(SMALL, sphere, domains=domains)
    assert first.records == again.records
    np.testing.assert_array_equal(first.best_genes, again.best_genes)
    other = run_ga(dataclasses.replace(SMALL, seed=4), sphere, domains=domains)
    assert other.records != first.records


def test_ga_shrinks_the_normalized_sphere(domains):
    cfg = GAConfig(population_size=10, generations=2000, seed=1, log_every=0)
    log = run_ga(cfg, NormalizedSphere(domains), domains=domains)
    initial = log.records[0].best_cost - 1.0
    final = log.records[-1].best_cost - 1.0
    assert final <= 0.01 * initial


def test_default_budgets_match():
    assert GAConfig().evaluations == 400_000
    assert CMAESConfig().evaluations == 400_000


@pytest.mark.parametrize(
    "cfg, message",
    [
        (GAConfig(population_size=4, elite_size=5), "elite_size 5 exceeds population_size 4"),
        (GAConfig(mutation_rate_per_gene=1.5), "mutation_rate_per_gene"),
        (GAConfig(generations=0), "generations"),
    ],
)
def test_invalid_config(cfg, message):
    with pytest.raises(ConfigError) as e:
        validate_ga_config(cfg)
    assert message in e.value.detail
