"""Plain data types shared by the optimizers, the evaluator and the harness."""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

FORMAT_VERSION = 1

CONSTRAINT_NAMES = (
    "deck_stress",
    "tower_stress",
    "cable_stress",
    "deck_deflection",
    "cable_slack",
    "comfort_acceleration",
)


@dataclass(frozen=True)
class FixedParams:
    """Bridge dimensions that are not searched over (meters)."""

    total_length: float = 220.0
    deck_width: float = 4.0
    tower_below_deck: float = 10.0


@dataclass(frozen=True)
class Materials:
    """Unit prices, densities, capacities and loads of the surrogate evaluator.

    SI units throughout (Pa, N/m, N/m², kg/m³) except prices in €/kg and €/m³.
    """

    elastic_modulus: float = 210e9
    gravity: float = 9.81
    steel_price: float = 3.0
    cable_price: float = 6.0
    concrete_price: float = 150.0
    steel_density: float = 7850.0
    concrete_density: float = 2500.0
    steel_yield: float = 235e6
    steel_safety_factor: float = 1.1
    cable_strength: float = 1570e6
    cable_utilization: float = 0.45
    deflection_divisor: float = 400.0
    slack_fraction: float = 0.05
    live_load: float = 5.0e3
    comfort: bool = True
    vertical_pedestrian_load: float = 0.4e3
    vertical_acceleration_limit: float = 0.7
    lateral_pedestrian_load: float = 0.05e3
    lateral_acceleration_limit: float = 0.15
    structural_damping: float = 0.005
    elements_per_bay: int = 10

    @property
    def allowable_steel_stress(self):
        return self.steel_yield / self.steel_safety_factor

    @property
    def allowable_cable_stress(self):
        return self.cable_strength * self.cable_utilization


@dataclass(frozen=True)
class BridgeGeometry:
    """Physical bridge decoded from a design vector.

    Lengths in meters, areas in m², inertias in m⁴, masses in kg/m, link
    stiffness in N/m and link damping in N·s/m.
    """

    cable_count: int
    total_length: float
    deck_width: float
    tower_below_deck: float
    central_span: float
    lateral_span: float
    lateral_anchorages: tuple  # from the abutment, increasing
    central_anchorages: tuple  # from the tower, increasing
    tower_height: float
    cable_spread: float
    cable_heights: tuple  # pair k = 0 nearest the tower along the deck
    tower_top_spacing: float
    tower_base_spacing: float
    link_k_transversal: float
    link_k_vertical: float
    link_c_transversal: float
    link_c_vertical: float
    slab_mass: float
    deck_area: float
    deck_depth: float
    deck_inertia: float
    tower_leg_width: float
    tower_leg_depth: float
    tower_web: float
    tower_flange: float
    tower_leg_area: float
    tower_leg_inertia: float
    prestress_factor: float
    cable_area: float

    @property
    def towers_x(self):
        return (self.lateral_span, self.total_length - self.lateral_span)

    @property
    def deck_anchorages_x(self):
        """Deck abscissae of every cable anchorage, left to right."""
        left = list(self.lateral_anchorages) + [self.lateral_span + p for p in self.central_anchorages]
        right = [self.total_length - x for x in reversed(left)]
        return tuple(left + right)


@dataclass(frozen=True)
class EvaluationResult:
    cost: float
    constraint_ratios: Dict[str, float]
    s_max: float
    feasible: bool
    singular: bool = False

    @classmethod
    def from_ratios(cls, cost, ratios, singular=False):
        s_max = max(ratios.values())
        return cls(cost=cost, constraint_ratios=dict(ratios), s_max=s_max,
                   feasible=bool(s_max <= 1.0), singular=singular)

    @classmethod
    def singular_result(cls, cost):
        ratios = {name: math.inf for name in CONSTRAINT_NAMES}
        return cls.from_ratios(cost, ratios, singular=True)


@dataclass(frozen=True)
class FitnessParams:
    c_r: float = 150.0


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 10
    generations: int = 40000
    tournament_size: int = 3
    crossover_rate_per_gene: float = 0.5
    mutation_rate_per_gene: float = 0.1
    elite_size: int = 1
    seed: int = 0
    log_every: int = 1000

    @property
    def evaluations(self):
        return self.population_size * self.generations


@dataclass(frozen=True)
class CMAESConfig:
    mu: int = 25
    lam: int = 50
    sigma0: float = 0.5
    generations: int = 8000
    seed: int = 0
    snapshot_every: int = 0
    log_every: int = 200

    @property
    def evaluations(self):
        return self.lam * self.generations


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    evals_used: int
    best_fitness: float
    best_cost: float
    best_s: float


@dataclass
class RunLog:
    """Per-generation best-so-far history of one optimizer run."""

    algorithm: str
    seed: int
    records: List[GenerationRecord] = field(default_factory=list)
    best_genes: Optional[np.ndarray] = None

    def append(self, record):
        self.records.append(record)

    @property
    def final(self):
        return self.records[-1]

    @property
    def evaluations(self):
        return self.records[-1].evals_used if self.records else 0


@dataclass(frozen=True)
class ReferenceDesign:
    """Design every run is measured against for the improvement rate."""

    genes: np.ndarray
    cost: float
    s: float
    published_cost: float = 91.354
    published_s: float = 0.9962


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    std: float


@dataclass(frozen=True)
class RankTestResult:
    metric: str
    u: float
    p: float
    effect_size: float


@dataclass
class ExperimentSummary:
    algorithm: str
    runs: int
    fitness: MetricSummary
    cost: MetricSummary
    s: MetricSummary
    improvement_rate: float
    improved_runs: int
    tests: List[RankTestResult] = field(default_factory=list)
