import numpy as np
import pytest

from bridgeopt.benchmarks import NormalizedSphere, default_population, minimize, rosenbrock, sphere


def test_test_functions():
    assert sphere(np.zeros(10)) == 0.0
    assert sphere([1.0, 2.0]) == 5.0
    assert rosenbrock(np.ones(22)) == 0.0
    assert rosenbrock([0.0, 0.0]) == 1.0


def test_default_population():
    assert default_population(10) == (10, 5)
    assert default_population(22) == (13, 6)


def test_normalized_sphere_poses_as_an_evaluator(domains):
    evaluator = NormalizedSphere(domains)
    at_centre = evaluator(domains.midpoint())
    assert at_centre.cost == 1.0
    assert at_centre.s_max == 0.0
    assert at_centre.feasible
    corner = evaluator(domains.lower)
    assert corner.cost == pytest.approx(1.0 + 22 * 0.25)


def test_minimize_respects_the_budget():
    best, evals, x = minimize(sphere, np.full(4, 3.0), 1.0, -5.0, 5.0, 60, seed=0, lam=6, mu=3)
    assert evals == 60
    assert np.all((x >= -5.0) & (x <= 5.0))
    assert best == sphere(x)
