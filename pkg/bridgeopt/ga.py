"""
Generational real-coded genetic algorithm.

Tournament selection, per-gene uniform crossover and per-gene mutation by
uniform resampling from the gene's domain; the best ``elite_size``
individuals pass to the next generation untouched. Variation never leaves
the domain box, so no repair step is needed.
"""

import logging

import numpy as np

from bridgeopt.design_space import load_domains
from bridgeopt.fitness import fitness
from bridgeopt.models import FitnessParams, GenerationRecord, RunLog
from bridgeopt.utils import raise_if_errors, validate_int, validate_rate

logger = logging.getLogger("bridgeopt")


def validate_ga_config(cfg):
    """
    Check a GAConfig against its invariants.

    Raises:
        ConfigError: listing every violated field.
    """
    errors = [
        validate_int("population_size", cfg.population_size, minimum=1),
        validate_int("generations", cfg.generations, minimum=1),
        validate_int("tournament_size", cfg.tournament_size, minimum=1),
        validate_int("elite_size", cfg.elite_size, minimum=1),
        validate_int("seed", cfg.seed, minimum=0),
        validate_rate("crossover_rate_per_gene", cfg.crossover_rate_per_gene),
        validate_rate("mutation_rate_per_gene", cfg.mutation_rate_per_gene),
    ]
    if not any(errors):
        if cfg.elite_size > cfg.population_size:
            errors.append(f"elite_size {cfg.elite_size} exceeds population_size {cfg.population_size}")
        if cfg.tournament_size > cfg.population_size:
            errors.append(f"tournament_size {cfg.tournament_size} exceeds population_size {cfg.population_size}")
    raise_if_errors(errors, "GA config")


def tournament_select(fitnesses, k, rng):
    """
    Pick one individual by a k-way tournament.

    Args:
        fitnesses (array-like): Fitness of every individual.
        k (int): Contestants, drawn uniformly with replacement.
        rng (numpy.random.Generator): Random source.

    Returns:
        int: Index of the fittest contestant; ties go to the lowest index.
    """
    draws = rng.integers(0, len(fitnesses), size=k)
    winner = int(draws[0])
    for index in draws[1:]:
        index = int(index)
        if fitnesses[index] > fitnesses[winner] or (fitnesses[index] == fitnesses[winner] and index < winner):
            winner = index
    return winner


def uniform_crossover(a, b, rate, rng):
    """
    Swap parental genes locus by locus with probability ``rate``.

    Returns:
        tuple[numpy.ndarray, numpy.ndarray]: The two children.
    """
    swap = rng.random(len(a)) < rate
    child1 = np.where(swap, b, a)
    child2 = np.where(swap, a, b)
    return child1, child2


def mutate(genes, rate, rng, domains):
    """
    Resample each gene from its domain with probability ``rate``.

    The mask is drawn first, then a full vector of fresh values, so the
    number of draws does not depend on the mask.
    """
    mask = rng.random(len(genes)) < rate
    fresh = domains.sample_uniform(rng)
    return np.where(mask, fresh, genes)


def next_generation(population, fitnesses, cfg, rng, domains):
    """
    Elites first, then children of tournament-selected pairs in order.

    Per pair the draws are: two tournaments, the crossover mask, then the
    mutation of child 1 and of child 2. Child 2 is dropped when only one
    slot is left.
    """
    size = len(population)
    order = np.argsort(-np.asarray(fitnesses), kind="stable")
    offspring = [population[i].copy() for i in order[:cfg.elite_size]]
    while len(offspring) < size:
        first = tournament_select(fitnesses, cfg.tournament_size, rng)
        second = tournament_select(fitnesses, cfg.tournament_size, rng)
        child1, child2 = uniform_crossover(population[first], population[second], cfg.crossover_rate_per_gene, rng)
        child1 = mutate(child1, cfg.mutation_rate_per_gene, rng, domains)
        child2 = mutate(child2, cfg.mutation_rate_per_gene, rng, domains)
        offspring.append(child1)
        if len(offspring) < size:
            offspring.append(child2)
    return np.array(offspring)


def run_ga(cfg, evaluator, fitness_params=FitnessParams(), domains=None):
    """
    Run the GA for ``cfg.generations`` generations.

    Every generation evaluates the whole population, elites included, so
    the run uses ``population_size * generations`` evaluations.

    Args:
        cfg (GAConfig): Hyperparameters and seed.
        evaluator (callable): Maps genes to an EvaluationResult.
        fitness_params (FitnessParams): Fitness constant.
        domains (DomainTable, optional): Defaults to the embedded table.

    Returns:
        RunLog: Best-so-far record per generation and the best genome.
    """
    validate_ga_config(cfg)
    domains = domains if domains is not None else load_domains()
    rng = np.random.default_rng(cfg.seed)
    log = RunLog(algorithm="ga", seed=cfg.seed)
    logger.info(f"GA seed {cfg.seed}: population {cfg.population_size}, {cfg.generations} generations")

    population = np.array([domains.sample_uniform(rng) for _ in range(cfg.population_size)])
    best = None
    evals = 0
    for generation in range(cfg.generations):
        results = [evaluator(genes) for genes in population]
        evals += len(results)
        fitnesses = np.array([fitness(r.cost, r.s_max, fitness_params) for r in results])

        leader = int(np.argmax(fitnesses))
        if best is None or fitnesses[leader] > best[0]:
            best = (float(fitnesses[leader]), results[leader], population[leader].copy())
        log.append(GenerationRecord(generation, evals, best[0], best[1].cost, best[1].s_max))
        logger.debug(f"GA gen {generation}: best fitness {best[0]:.6f}")
        if cfg.log_every and (generation + 1) % cfg.log_every == 0:
            logger.info(
                f"GA seed {cfg.seed} gen {generation + 1}: fitness {best[0]:.6f} "
                f"cost {best[1].cost:.3f} s {best[1].s_max:.4f}"
            )

        if generation + 1 < cfg.generations:
            population = next_generation(population, fitnesses, cfg, rng, domains)

    log.best_genes = best[2]
    logger.info(f"GA seed {cfg.seed} done: fitness {best[0]:.6f} after {evals} evaluations")
    return log
