"""Scalar fitness combining cost and structural constraint (maximized)."""

import math

import numpy as np

from bridgeopt.exceptions import ConfigError, DomainError
from bridgeopt.models import FitnessParams
from bridgeopt.utils import validate_positive


def fitness_params(c_r):
    """Build FitnessParams from a user value, raising ConfigError unless c_r > 0."""
    error = validate_positive("cr", c_r)
    if error:
        raise ConfigError(error)
    return FitnessParams(c_r=float(c_r))


def branch(cost, s, params=FitnessParams()):
    """
    Regime a (cost, s) point falls in.

    Returns:
        int: 1 while cost >= c_r, 2 for cheaper but unsafe designs,
            3 for cheaper safe designs.
    """
    if cost >= params.c_r:
        return 1
    if s > 1.0:
        return 2
    return 3


def fitness(cost, s, params=FitnessParams()):
    """
    Three-regime fitness, larger is better.

    Expensive designs score ``c_r / cost`` in (0, 1]; cheaper designs that
    violate a constraint score ``1 + 1 / s`` in [1, 2); cheaper safe designs
    score ``2 - (1 - s) + c_r / cost`` above 2, rewarding s close to 1.
    ``cost == c_r`` belongs to the first regime and ``s = inf`` scores 1.

    Args:
        cost (float): Cost in k€, > 0.
        s (float): Maximum constraint ratio, >= 0, may be inf.
        params (FitnessParams): Holds c_r.

    Returns:
        float: The fitness.

    Raises:
        DomainError: if cost <= 0 or s < 0 (or either is NaN).
    """
    if not cost > 0.0:
        raise DomainError(f"cost must be > 0, got {cost!r}")
    if not s >= 0.0:
        raise DomainError(f"s must be >= 0, got {s!r}")
    c_r = params.c_r
    if cost >= c_r:
        return c_r / cost
    if s > 1.0:
        return 1.0 + (0.0 if math.isinf(s) else 1.0 / s)
    return 2.0 - (1.0 - s) + c_r / cost


def fitness_many(costs, ss, params=FitnessParams()):
    """Element-wise ``fitness`` over two equally long sequences."""
    return np.array([fitness(float(c), float(s), params) for c, s in zip(costs, ss)])
