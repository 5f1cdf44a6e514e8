"""The 22-gene design space: domains, sampling, clamp repair and decoding."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from bridgeopt.exceptions import ConfigError, InvalidGeometry
from bridgeopt.models import BridgeGeometry, FixedParams
from bridgeopt.utils import data_path, load_json

logger = logging.getLogger("bridgeopt")

N_GENES = 22
GENE_KINDS = ("discrete", "geometry", "control", "sectional")

# Physical value of one unit of each dimensionless sectional / control gene.
SECTION_SCALES = {
    "slab_mass": 250.0,  # kg/m (0.25 t/m)
    "deck_area": 2.0e-4,  # m²
    "deck_depth": 1.0,  # m
    "tower_width": 1.0,  # m
    "tower_depth": 0.1,  # m
    "tower_web": 0.5e-3,  # m
    "tower_flange": 1.0e-3,  # m
    "cable_area": 2.0e-4,  # m²
    "link_stiffness": 1.0e5,  # N/m (100 kN/m)
    "link_damping": 1.0e3,  # N·s/m (1 kN·s/m)
}

REFERENCE_CABLE_SPREAD = 2.0  # m
TOWER_HEIGHT_DIVISOR = 5.0


@dataclass(frozen=True)
class GeneDomain:
    index: int
    name: str
    lower: float
    upper: float
    kind: str


class DomainTable:
    """
    Per-gene bounds of the design vector.

    Args:
        genes (list[GeneDomain]):
            Exactly 22 entries ordered by index.
    """

    def __init__(self, genes):
        self.genes = tuple(genes)
        self.lower = np.array([g.lower for g in self.genes], dtype=float)
        self.upper = np.array([g.upper for g in self.genes], dtype=float)
        self.lower.setflags(write=False)
        self.upper.setflags(write=False)

    def __len__(self):
        return len(self.genes)

    @property
    def span(self):
        return self.upper - self.lower

    def index_of(self, name):
        for g in self.genes:
            if g.name == name:
                return g.index
        raise KeyError(name)

    def sample_uniform(self, rng):
        """
        Draw one design vector with every gene independently uniform in its domain.

        Args:
            rng (numpy.random.Generator):
                Seeded random source, owned by the caller.

        Returns:
            numpy.ndarray: 22 genes; DV0 stays a real in its interval.
        """
        return rng.uniform(self.lower, self.upper)

    def clamp(self, genes):
        """Project each gene onto its closed interval; in-domain genes are untouched."""
        return np.minimum(self.upper, np.maximum(self.lower, np.asarray(genes, dtype=float)))

    def is_within(self, genes):
        genes = np.asarray(genes, dtype=float)
        if genes.shape != self.lower.shape:
            return False
        return bool(np.all((genes >= self.lower) & (genes <= self.upper)))

    def midpoint(self):
        return (self.lower + self.upper) / 2.0

    def to_unit(self, genes):
        """Affine map from gene space onto [0, 1]^22."""
        return (np.asarray(genes, dtype=float) - self.lower) / self.span

    def from_unit(self, unit):
        """Inverse of ``to_unit``."""
        return self.lower + np.asarray(unit, dtype=float) * self.span

    def describe(self, genes):
        """
        List the problems that keep ``genes`` from being a valid design.

        Args:
            genes (array-like): Candidate design vector.

        Returns:
            list[str]: One message per offending gene; empty when valid.
        """
        genes = np.asarray(genes, dtype=float)
        if genes.ndim != 1 or genes.size != len(self):
            return [f"expected {len(self)} genes, got {genes.size}"]
        problems = []
        for g, value in zip(self.genes, genes):
            if not np.isfinite(value):
                problems.append(f"DV{g.index} ({g.name}) is not finite")
            elif value < g.lower or value > g.upper:
                problems.append(
                    f"DV{g.index} ({g.name}) = {value!r} outside [{g.lower}, {g.upper}]"
                )
        return problems


def load_domains(path=None):
    """
    Load and validate a domain table.

    Args:
        path (str, optional):
            JSON file with a ``genes`` list. Defaults to the embedded table.

    Returns:
        DomainTable: The validated table.

    Raises:
        IoError: if the file is missing.
        ConfigError: if any entry breaks the table invariants.
    """
    path = path or data_path("domains.json")
    document = load_json(path)
    entries = document.get("genes") if isinstance(document, dict) else None
    if not isinstance(entries, list):
        raise ConfigError(f"{path}: expected an object with a 'genes' list")

    problems = []
    by_index = {}
    for position, entry in enumerate(entries):
        try:
            gene = GeneDomain(
                index=int(entry["index"]),
                name=str(entry["name"]),
                lower=float(entry["lower"]),
                upper=float(entry["upper"]),
                kind=str(entry.get("kind", "sectional")),
            )
        except (KeyError, TypeError, ValueError) as e:
            problems.append(f"entry {position} is malformed ({e})")
            continue
        if gene.index in by_index:
            problems.append(f"index {gene.index} appears twice")
        if not (math.isfinite(gene.lower) and math.isfinite(gene.upper)) or gene.lower >= gene.upper:
            problems.append(f"DV{gene.index} needs lower < upper, got [{gene.lower}, {gene.upper}]")
        if gene.kind not in GENE_KINDS:
            problems.append(f"DV{gene.index} has unknown kind {gene.kind!r}")
        by_index[gene.index] = gene

    missing = sorted(set(range(N_GENES)) - set(by_index))
    extra = sorted(set(by_index) - set(range(N_GENES)))
    if missing:
        problems.append(f"missing indices {missing}")
    if extra:
        problems.append(f"unexpected indices {extra}")
    if problems:
        raise ConfigError(f"{path}: " + "; ".join(problems))

    logger.debug(f"Loaded domain table from {path}")
    return DomainTable([by_index[i] for i in range(N_GENES)])


def cable_count(dv0):
    """Round-half-up quantization of DV0 onto {3, ..., 7}."""
    return int(min(7, max(3, math.floor(float(dv0) + 0.5))))


def hollow_section(width, depth, web, flange):
    """
    Area and in-plane inertia of a rectangular hollow section.

    Walls that meet in the middle leave a solid rectangle.

    Returns:
        tuple[float, float]: (area m², inertia m⁴)
    """
    inner_width = max(width - 2.0 * web, 0.0)
    inner_depth = max(depth - 2.0 * flange, 0.0)
    area = width * depth - inner_width * inner_depth
    inertia = (width * depth ** 3 - inner_width * inner_depth ** 3) / 12.0
    return area, inertia


def decode(genes, fixed=FixedParams()):
    """
    Turn a design vector into physical bridge dimensions.

    Geometry genes multiply reference dimensions derived from ``fixed``:
    the reference central span is half the total length, anchorage
    spacings split each segment into ``n + 1`` equal bays, the tower
    height is a fifth of the central span and the cable spread is 2 m.

    Args:
        genes (array-like):
            22 in-domain genes.
        fixed (FixedParams):
            Dimensions that are not searched over.

    Returns:
        BridgeGeometry: Decoded geometry and section properties.

    Raises:
        InvalidGeometry: if the anchorages come out unordered.
    """
    g = np.asarray(genes, dtype=float)
    n = cable_count(g[0])
    length = fixed.total_length
    width = fixed.deck_width

    central = g[1] * length / 2.0
    lateral = (length - central) / 2.0

    lateral_bay = lateral / (n + 1)
    second = (1.0 + g[2]) * lateral_bay
    lateral_anchorages = [lateral_bay] + list(np.linspace(second, n * lateral_bay, n - 1))

    central_bay = (central / 2.0) / (n + 1)
    central_anchorages = list(np.linspace(g[3] * central_bay, central / 2.0 - g[4] * central_bay, n))

    tower_height = g[5] * central / TOWER_HEIGHT_DIVISOR
    spread = min(g[6] * REFERENCE_CABLE_SPREAD, tower_height / 2.0)
    cable_heights = [tower_height - spread + spread * k / (n - 1) for k in range(n)]

    _check_increasing("lateral anchorage", [0.0] + lateral_anchorages + [lateral])
    _check_increasing("central anchorage", [0.0] + central_anchorages + [central / 2.0])
    _check_increasing("cable height", [0.0] + cable_heights)

    deck_area = g[14] * SECTION_SCALES["deck_area"]
    deck_depth = g[15] * SECTION_SCALES["deck_depth"]
    leg_width = g[16] * SECTION_SCALES["tower_width"]
    leg_depth = g[17] * SECTION_SCALES["tower_depth"]
    web = g[18] * SECTION_SCALES["tower_web"]
    flange = g[19] * SECTION_SCALES["tower_flange"]
    leg_area, leg_inertia = hollow_section(leg_width, leg_depth, web, flange)

    return BridgeGeometry(
        cable_count=n,
        total_length=length,
        deck_width=width,
        tower_below_deck=fixed.tower_below_deck,
        central_span=float(central),
        lateral_span=float(lateral),
        lateral_anchorages=tuple(float(x) for x in lateral_anchorages),
        central_anchorages=tuple(float(x) for x in central_anchorages),
        tower_height=float(tower_height),
        cable_spread=float(spread),
        cable_heights=tuple(float(h) for h in cable_heights),
        tower_top_spacing=float(g[7] * width),
        tower_base_spacing=float(g[8] * width),
        link_k_transversal=float(g[9] * SECTION_SCALES["link_stiffness"]),
        link_k_vertical=float(g[10] * SECTION_SCALES["link_stiffness"]),
        link_c_transversal=float(g[11] * SECTION_SCALES["link_damping"]),
        link_c_vertical=float(g[12] * SECTION_SCALES["link_damping"]),
        slab_mass=float(g[13] * SECTION_SCALES["slab_mass"]),
        deck_area=float(deck_area),
        deck_depth=float(deck_depth),
        deck_inertia=float(deck_area * deck_depth ** 2 / 4.0),
        tower_leg_width=float(leg_width),
        tower_leg_depth=float(leg_depth),
        tower_web=float(web),
        tower_flange=float(flange),
        tower_leg_area=float(leg_area),
        tower_leg_inertia=float(leg_inertia),
        prestress_factor=float(g[20]),
        cable_area=float(g[21] * SECTION_SCALES["cable_area"]),
    )


def _check_increasing(label, values):
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InvalidGeometry(f"{label}s not strictly increasing: {values}")
