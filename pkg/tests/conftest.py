import numpy as np
import pytest

from bridgeopt.design_space import load_domains
from bridgeopt.evaluator import Evaluator
from bridgeopt.harness import REFERENCE_GENES

# geometry genes at 1, control and sectional genes at their midpoints, 5 cables
MID_GENES = [5, 1, 1, 1, 1, 1, 1, 1, 1, 500.0005, 500.0005, 500.0005, 500.0005,
             3.55, 40.05, 0.9, 0.95, 10.05, 10.15, 4.65, 1.85, 4.75]


@pytest.fixture(scope="session")
def domains():
    return load_domains()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def reference_genes():
    return np.array(REFERENCE_GENES)


@pytest.fixture
def mid_genes():
    return np.array(MID_GENES, dtype=float)


@pytest.fixture(scope="session")
def evaluator():
    return Evaluator()

