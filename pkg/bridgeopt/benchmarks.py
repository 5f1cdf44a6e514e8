"""
Known test functions for checking the optimizers away from the bridge.

``minimize`` drives the same CMAESState the bridge runs use, on an
arbitrary box mapped onto the unit cube. ``NormalizedSphere`` dresses a
sphere up as an evaluator so ``run_ga`` can be checked unchanged.
"""

import logging
import math

import numpy as np

from bridgeopt.cmaes import CMAESState
from bridgeopt.design_space import load_domains
from bridgeopt.models import CONSTRAINT_NAMES, EvaluationResult

logger = logging.getLogger("bridgeopt")


def sphere(x):
    x = np.asarray(x, dtype=float)
    return float(x @ x)


def rosenbrock(x):
    x = np.asarray(x, dtype=float)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def default_population(dimension):
    """Standard (lambda, mu) for a dimension: 4 + floor(3 ln n) and half of it."""
    lam = 4 + int(math.floor(3 * math.log(dimension)))
    return lam, lam // 2


def minimize(function, x0, sigma0, lower, upper, max_evals, seed=0, lam=None, mu=None, target=None):
    """
    Minimize ``function`` over the box [lower, upper]^n with CMA-ES.

    The box is mapped onto the unit cube, so ``sigma0`` is divided by the
    box width. Samples are clamped into the box before evaluation.

    Args:
        function (callable): Objective on a numpy vector.
        x0 (array-like): Start point inside the box.
        sigma0 (float): Initial step size in function coordinates.
        lower (float): Lower bound of every coordinate.
        upper (float): Upper bound of every coordinate.
        max_evals (int): Evaluation budget.
        seed (int): RNG seed.
        lam (int, optional): Samples per generation.
        mu (int, optional): Parents per generation.
        target (float, optional): Stop once the best value is at or below it.

    Returns:
        tuple[float, int, numpy.ndarray]: Best value, evaluations used and
            the best point.
    """
    x0 = np.asarray(x0, dtype=float)
    width = upper - lower
    default_lam, default_mu = default_population(len(x0))
    lam = lam or default_lam
    mu = mu or min(default_mu, lam)
    state = CMAESState((x0 - lower) / width, sigma0 / width, mu, lam)
    rng = np.random.default_rng(seed)

    best_value, best_x, evals = math.inf, x0, 0
    while evals < max_evals:
        unit = state.ask(rng)
        points = lower + unit * width
        values = np.array([function(x) for x in points])
        evals += lam
        leader = int(np.argmin(values))
        if values[leader] < best_value:
            best_value, best_x = float(values[leader]), points[leader].copy()
        if target is not None and best_value <= target:
            break
        state.tell(unit, -values)
    logger.debug(f"minimize: best {best_value:.3e} after {evals} evaluations, sigma {state.sigma:.3e}")
    return best_value, evals, best_x


class NormalizedSphere:
    """
    Sphere around the domain midpoint posing as a bridge evaluator.

    The value is ``sum((u - 0.5)^2)`` over the unit-cube coordinates of the
    genes and is reported as ``cost = 1 + value`` with every constraint
    ratio 0, so the fitness ``1 + c_r / cost`` falls as the value grows.
    """

    def __init__(self, domains=None):
        self.domains = domains if domains is not None else load_domains()

    def value(self, genes):
        return sphere(self.domains.to_unit(genes) - 0.5)

    def __call__(self, genes):
        ratios = dict.fromkeys(CONSTRAINT_NAMES, 0.0)
        return EvaluationResult.from_ratios(1.0 + self.value(genes), ratios)
