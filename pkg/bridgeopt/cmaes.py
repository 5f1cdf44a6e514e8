"""
(mu/mu_w, lambda)-CMA-ES with clamp repair, searching the unit cube.

The strategy follows the classic ask/tell formulation: weighted
recombination of the best ``mu`` samples, cumulative step-size adaptation
and rank-one plus rank-mu covariance updates. Candidates are clamped into
[0, 1]^n and the repaired points are both evaluated and fed back.
"""

import logging
import math
import os

import numpy as np

from bridgeopt.design_space import load_domains
from bridgeopt.exceptions import DimensionMismatch
from bridgeopt.fitness import fitness
from bridgeopt.models import FitnessParams, GenerationRecord, RunLog
from bridgeopt.utils import dump_json, load_json, raise_if_errors, validate_int, validate_positive

logger = logging.getLogger("bridgeopt")

EIGENVALUE_FLOOR = 1e-20
CONDITION_LIMIT = 1e14


class CMAESState:
    """
    Distribution state of one CMA-ES run in unit-cube coordinates.

    Args:
        mean (array-like): Initial mean, each coordinate in [0, 1].
        sigma (float): Initial step size.
        mu (int): Number of recombined parents.
        lam (int): Samples per generation.
    """

    def __init__(self, mean, sigma, mu, lam):
        self.mean = np.array(mean, dtype=float)
        n = self.dimension = len(self.mean)
        self.sigma0 = float(sigma)
        self.sigma = float(sigma)
        self.mu = int(mu)
        self.lam = int(lam)

        weights = math.log(self.mu + 0.5) - np.log(np.arange(1, self.mu + 1))
        self.weights = weights / weights.sum()
        self.mueff = 1.0 / np.sum(self.weights ** 2)
        self.cc = (4 + self.mueff / n) / (n + 4 + 2 * self.mueff / n)
        self.cs = (self.mueff + 2) / (n + self.mueff + 5)
        self.c1 = 2 / ((n + 1.3) ** 2 + self.mueff)
        self.cmu = min(1 - self.c1, 2 * (self.mueff - 2 + 1 / self.mueff) / ((n + 2) ** 2 + self.mueff))
        self.damps = 2 * self.mueff / self.lam + 0.3 + self.cs
        self.eigen_gap = int(math.ceil(1.0 / (10 * n * (self.c1 + self.cmu))))

        self.generation = 0
        self.restarts = 0
        self._reset_distribution()

    def _reset_distribution(self):
        n = self.dimension
        self.C = np.eye(n)
        self.pc = np.zeros(n)
        self.ps = np.zeros(n)
        self.B = np.eye(n)
        self.D = np.ones(n)
        self.invsqrt = np.eye(n)
        self.eigen_generation = self.generation

    @property
    def constants(self):
        return {
            "mu": self.mu, "lam": self.lam, "weights": self.weights.tolist(), "mueff": self.mueff,
            "cc": self.cc, "cs": self.cs, "c1": self.c1, "cmu": self.cmu,
            "damps": self.damps, "eigen_gap": self.eigen_gap,
        }

    @property
    def condition_number(self):
        return float(self.D.max() / self.D.min())

    def update_eigensystem(self, force=False):
        """
        Refresh the cached eigendecomposition of C when it is stale.

        Eigenvalues are floored at EIGENVALUE_FLOOR. When the condition
        number exceeds CONDITION_LIMIT the distribution restarts around the
        current mean with the initial step size.
        """
        if not force and self.generation - self.eigen_generation < self.eigen_gap:
            return
        self.C = (self.C + self.C.T) / 2.0
        eigenvalues, basis = np.linalg.eigh(self.C)
        eigenvalues = np.maximum(eigenvalues, EIGENVALUE_FLOOR)
        if eigenvalues.max() / eigenvalues.min() > CONDITION_LIMIT:
            logger.info(
                f"CMA-ES generation {self.generation}: condition number "
                f"{eigenvalues.max() / eigenvalues.min():.3e}, restarting from the current mean"
            )
            self.restarts += 1
            self.sigma = self.sigma0
            self._reset_distribution()
            return
        self.D = eigenvalues
        self.B = basis
        self.invsqrt = (basis / np.sqrt(eigenvalues)) @ basis.T
        self.eigen_generation = self.generation

    def sample(self, rng, count=None):
        """Draw ``count`` (default lambda) unrepaired samples m + sigma * B * D^(1/2) * z."""
        self.update_eigensystem()
        z = rng.standard_normal((count or self.lam, self.dimension))
        return self.mean + self.sigma * (z * np.sqrt(self.D)) @ self.B.T

    def ask(self, rng):
        """
        Sample lambda candidates and clamp them into the unit cube.

        Returns:
            numpy.ndarray: (lambda, n) repaired candidates.
        """
        return np.clip(self.sample(rng), 0.0, 1.0)

    def tell(self, candidates, fitnesses):
        """
        Update mean, evolution paths, covariance and step size.

        Args:
            candidates (array-like): (lambda, n) evaluated points.
            fitnesses (array-like): lambda values, larger is better.

        Raises:
            DimensionMismatch: on wrongly shaped inputs.
        """
        x = np.asarray(candidates, dtype=float)
        f = np.asarray(fitnesses, dtype=float)
        if x.shape != (self.lam, self.dimension) or f.shape != (self.lam,):
            raise DimensionMismatch(
                f"expected {self.lam} candidates of dimension {self.dimension} and "
                f"{self.lam} fitnesses, got {x.shape} and {f.shape}"
            )
        n = self.dimension
        order = np.argsort(-f, kind="stable")
        parents = x[order[:self.mu]]

        old = self.mean
        self.mean = self.weights @ parents
        y = self.mean - old

        csn = math.sqrt(self.cs * (2 - self.cs) * self.mueff) / self.sigma
        self.ps = (1 - self.cs) * self.ps + csn * (self.invsqrt @ y)
        self.generation += 1
        squared_ps = float(self.ps @ self.ps)
        # rank-one accumulation is held while sigma grows quickly
        hsig = squared_ps / n / (1 - (1 - self.cs) ** (2 * self.generation)) < 2 + 4.0 / (n + 1)
        ccn = math.sqrt(self.cc * (2 - self.cc) * self.mueff) / self.sigma
        self.pc = (1 - self.cc) * self.pc + ccn * hsig * y

        c1a = self.c1 * (1 - (1 - hsig ** 2) * self.cc * (2 - self.cc))
        steps = (parents - old) / self.sigma
        rank_mu = (steps.T * self.weights) @ steps
        self.C = ((1 - c1a - self.cmu * self.weights.sum()) * self.C
                  + self.c1 * np.outer(self.pc, self.pc)
                  + self.cmu * rank_mu)
        self.C = (self.C + self.C.T) / 2.0

        self.sigma *= math.exp(min(1.0, self.cs / self.damps * (squared_ps / n - 1) / 2))

    def snapshot(self):
        """JSON-ready copy of the full dynamic state."""
        return {
            "mean": self.mean.tolist(),
            "sigma": self.sigma,
            "sigma0": self.sigma0,
            "mu": self.mu,
            "lam": self.lam,
            "C": self.C.tolist(),
            "pc": self.pc.tolist(),
            "ps": self.ps.tolist(),
            "B": self.B.tolist(),
            "D": self.D.tolist(),
            "invsqrt": self.invsqrt.tolist(),
            "generation": self.generation,
            "eigen_generation": self.eigen_generation,
            "restarts": self.restarts,
            "constants": self.constants,
        }

    @classmethod
    def from_snapshot(cls, document):
        state = cls(document["mean"], document["sigma0"], document["mu"], document["lam"])
        state.sigma = float(document["sigma"])
        for key in ("C", "pc", "ps", "B", "D", "invsqrt"):
            setattr(state, key, np.array(document[key], dtype=float))
        state.generation = int(document["generation"])
        state.eigen_generation = int(document["eigen_generation"])
        state.restarts = int(document["restarts"])
        return state


def validate_cmaes_config(cfg):
    errors = [
        validate_int("mu", cfg.mu, minimum=1),
        validate_int("lambda", cfg.lam, minimum=1),
        validate_positive("sigma0", cfg.sigma0),
        validate_int("generations", cfg.generations, minimum=1),
        validate_int("seed", cfg.seed, minimum=0),
        validate_int("snapshot_every", cfg.snapshot_every, minimum=0),
    ]
    if not any(errors) and cfg.mu > cfg.lam:
        errors.append(f"mu {cfg.mu} exceeds lambda {cfg.lam}")
    raise_if_errors(errors, "CMA-ES config")


def strategy_constants(cfg, dimension):
    """Strategy constants a run with ``cfg`` uses in ``dimension`` genes."""
    return CMAESState(np.full(dimension, 0.5), cfg.sigma0, cfg.mu, cfg.lam).constants


def snapshot_path(directory, seed):
    return os.path.join(directory, f"{seed}.json")


def run_cmaes(cfg, evaluator, fitness_params=FitnessParams(), domains=None, snapshot_dir=None, resume=None):
    """
    Run CMA-ES for ``cfg.generations`` generations of ``cfg.lam`` samples.

    The initial mean is a uniform random point of the unit cube. The best
    evaluated design so far is archived for reporting only; it is never
    reinjected into the distribution.

    Args:
        cfg (CMAESConfig): Hyperparameters and seed.
        evaluator (callable): Maps genes to an EvaluationResult.
        fitness_params (FitnessParams): Fitness constant.
        domains (DomainTable, optional): Defaults to the embedded table.
        snapshot_dir (str, optional): Where ``<seed>.json`` snapshots go
            every ``cfg.snapshot_every`` generations.
        resume (str, optional): Snapshot file to continue from.

    Returns:
        RunLog: Best-so-far record per generation and the best genome.
    """
    validate_cmaes_config(cfg)
    domains = domains if domains is not None else load_domains()
    rng = np.random.default_rng(cfg.seed)
    log = RunLog(algorithm="cmaes", seed=cfg.seed)

    if resume:
        document = load_json(resume)
        state = CMAESState.from_snapshot(document["state"])
        rng.bit_generator.state = document["rng"]
        start = int(document["next_generation"])
        for row in document["records"]:
            log.append(GenerationRecord(*row))
        archive = document["archive"]
        best = (archive["fitness"], archive["cost"], archive["s"], np.array(archive["genes"]))
        evals = log.evaluations
        logger.info(f"CMA-ES seed {cfg.seed}: resuming at generation {start} from {resume}")
    else:
        state = CMAESState(rng.random(len(domains)), cfg.sigma0, cfg.mu, cfg.lam)
        start = 0
        best = None
        evals = 0
        constants = state.constants
        logger.info(
            f"CMA-ES seed {cfg.seed}: mu {cfg.mu}, lambda {cfg.lam}, {cfg.generations} generations, "
            f"mueff {constants['mueff']:.4f} cc {constants['cc']:.4f} cs {constants['cs']:.4f} "
            f"c1 {constants['c1']:.3e} cmu {constants['cmu']:.3e} damps {constants['damps']:.4f} "
            f"eigen gap {constants['eigen_gap']}"
        )

    for generation in range(start, cfg.generations):
        unit = state.ask(rng)
        population = domains.clamp(domains.from_unit(unit))
        results = [evaluator(genes) for genes in population]
        evals += len(results)
        fitnesses = np.array([fitness(r.cost, r.s_max, fitness_params) for r in results])
        state.tell(unit, fitnesses)

        leader = int(np.argmax(fitnesses))
        if best is None or fitnesses[leader] > best[0]:
            best = (float(fitnesses[leader]), results[leader].cost, results[leader].s_max,
                    population[leader].copy())
        log.append(GenerationRecord(generation, evals, best[0], best[1], best[2]))
        logger.debug(
            f"CMA-ES gen {generation}: best fitness {best[0]:.6f}, sigma {state.sigma:.3e}, "
            f"condition {state.condition_number:.3e}"
        )
        if cfg.log_every and (generation + 1) % cfg.log_every == 0:
            logger.info(
                f"CMA-ES seed {cfg.seed} gen {generation + 1}: fitness {best[0]:.6f} "
                f"cost {best[1]:.3f} s {best[2]:.4f} sigma {state.sigma:.3e}"
            )
        if snapshot_dir and cfg.snapshot_every and (generation + 1) % cfg.snapshot_every == 0:
            _write_snapshot(snapshot_dir, cfg.seed, generation + 1, state, rng, log, best)

    log.best_genes = best[3]
    logger.info(f"CMA-ES seed {cfg.seed} done: fitness {best[0]:.6f} after {evals} evaluations")
    return log


def _write_snapshot(directory, seed, next_generation, state, rng, log, best):
    path = snapshot_path(directory, seed)
    dump_json(path, {
        "seed": seed,
        "next_generation": next_generation,
        "state": state.snapshot(),
        "rng": rng.bit_generator.state,
        "records": [[r.generation, r.evals_used, r.best_fitness, r.best_cost, r.best_s] for r in log.records],
        "archive": {"fitness": best[0], "cost": best[1], "s": best[2], "genes": best[3]},
    })
    logger.debug(f"Snapshot written to {path}")
