"""
Surrogate evaluator: material cost and normalized structural constraints.

One call of ``evaluate`` is one evaluation for budget accounting. It
decodes the genes, prices the materials, runs the dead and live static
analyses and a single-mode comfort check, and reports every constraint
as a demand/capacity ratio.
"""

import dataclasses
import logging
import math

import numpy as np

from bridgeopt.design_space import decode
from bridgeopt.exceptions import AnalysisSingular, ConfigError
from bridgeopt.models import CONSTRAINT_NAMES, EvaluationResult, FixedParams, Materials
from bridgeopt.structure import analyze, build_model, dead_case, live_case
from bridgeopt.utils import data_path, load_json, validate_int, validate_positive

logger = logging.getLogger("bridgeopt")


def load_materials(path=None):
    """
    Load the price, capacity and load table.

    Keys missing from the file keep their default value.

    Args:
        path (str, optional):
            JSON file. Defaults to the embedded table.

    Returns:
        Materials: The validated table.

    Raises:
        IoError: if the file is missing.
        ConfigError: on unknown keys or invalid values.
    """
    path = path or data_path("materials.json")
    document = load_json(path)
    if not isinstance(document, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    known = {f.name for f in dataclasses.fields(Materials)}
    values = {k: v for k, v in document.items() if k != "format_version"}
    unknown = sorted(set(values) - known)
    errors = [f"unknown key {k!r}" for k in unknown]
    for key, value in values.items():
        if key == "comfort":
            if not isinstance(value, bool):
                errors.append(f"comfort must be true or false, got {value!r}")
        elif key == "elements_per_bay":
            errors.append(validate_int(key, value, minimum=1))
        elif key in known:
            errors.append(validate_positive(key, value))
    errors = [e for e in errors if e]
    if errors:
        raise ConfigError(f"{path}: " + "; ".join(errors))
    logger.debug(f"Loaded materials from {path}")
    return Materials(**{k: v for k, v in values.items() if k in known})


def cable_lengths(geometry):
    """
    Length of every stay, four families of ``cable_count`` stays.

    Pair k (k = 0 nearest the tower along the deck) joins the tower at
    ``cable_heights[k]`` with a lateral and a central anchorage; both
    towers carry the same stays.
    """
    n = geometry.cable_count
    lengths = []
    for _ in geometry.towers_x:
        for k in range(n):
            height = geometry.cable_heights[k]
            lateral_run = geometry.lateral_span - geometry.lateral_anchorages[n - 1 - k]
            lengths.append(math.hypot(lateral_run, height))
            lengths.append(math.hypot(geometry.central_anchorages[k], height))
    return lengths


def cost_breakdown(geometry, materials=Materials()):
    """
    Price of each material in k€.

    Args:
        geometry (BridgeGeometry): Decoded design.
        materials (Materials): Unit prices and densities.

    Returns:
        dict: ``deck_steel``, ``tower_steel``, ``cable_steel`` and
            ``slab_concrete``; they sum to ``cost(geometry)``.
    """
    steel = materials.steel_density * materials.steel_price
    deck = geometry.deck_area * geometry.total_length * steel

    leg = math.hypot(geometry.tower_height + geometry.tower_below_deck,
                     (geometry.tower_top_spacing - geometry.tower_base_spacing) / 2.0)
    # two towers, each two legs plus the top cross beam
    tower = 2.0 * (2.0 * leg + geometry.tower_top_spacing) * geometry.tower_leg_area * steel

    cables = math.fsum(cable_lengths(geometry)) * geometry.cable_area * materials.steel_density * materials.cable_price
    slab = geometry.slab_mass / materials.concrete_density * geometry.total_length * materials.concrete_price
    return {
        "deck_steel": deck / 1000.0,
        "tower_steel": tower / 1000.0,
        "cable_steel": cables / 1000.0,
        "slab_concrete": slab / 1000.0,
    }


def cost(geometry, materials=Materials()):
    """Total material cost in k€."""
    parts = cost_breakdown(geometry, materials)
    return parts["deck_steel"] + parts["tower_steel"] + parts["cable_steel"] + parts["slab_concrete"]


def utilization(demand, capacity):
    return demand / capacity


def slack_ratio(force, prestress, fraction=0.05):
    """
    Cable slack ratio.

    With ``limit = fraction * prestress`` the ratio is ``limit / force``
    while the stay keeps at least ``limit``, and ``1 + (limit - force) /
    prestress`` below it, so a slack stay scores ``1 + fraction``.
    """
    limit = fraction * prestress
    if force >= limit:
        return limit / force
    return 1.0 + (limit - force) / prestress


def vertical_envelope(frequency):
    """Resonance factor of walking load against the vertical frequency (Hz)."""
    if frequency <= 2.3:
        return 1.0
    if frequency <= 2.5:
        return 1.0 - 0.75 * (frequency - 2.3) / 0.2
    if frequency <= 4.6:
        return 0.25
    if frequency <= 5.0:
        return 0.25 * (5.0 - frequency) / 0.4
    return 0.0


def lateral_envelope(frequency):
    """Resonance factor of walking load against the lateral frequency (Hz)."""
    if frequency <= 1.2:
        return 1.0
    if frequency <= 2.5:
        return (2.5 - frequency) / 1.3
    return 0.0


def comfort_ratio(geometry, materials, central_deflection):
    """
    Pedestrian comfort ratio from two single-mode checks.

    The vertical mode takes its structural stiffness from the live-load
    deflection of the central span and adds the two vertical links; the
    lateral mode uses the deck plate bending about its vertical axis plus
    the two transversal links. Link dashpots add to 0.5 % structural
    damping. The peak resonant acceleration of each mode is divided by its
    limit and the larger ratio is returned.

    Args:
        geometry (BridgeGeometry): Decoded design.
        materials (Materials): Loads and limits.
        central_deflection (float): Largest live-load deflection of the
            central span, m.

    Returns:
        float: Comfort ratio, >= 0.
    """
    span = geometry.central_span
    width = geometry.deck_width
    mass = materials.steel_density * geometry.deck_area + geometry.slab_mass
    modal_mass = mass * span / 2.0
    # generalized load of a half-sine mode under a uniform line load
    shape = span * 2.0 / math.pi

    k_struct = materials.live_load * width * shape / max(central_deflection, 1e-12)
    k_vertical = k_struct + 2.0 * geometry.link_k_vertical
    f_vertical = math.sqrt(k_vertical / modal_mass) / (2.0 * math.pi)
    zeta_vertical = min(1.0, materials.structural_damping
                        + 2.0 * geometry.link_c_vertical / (2.0 * math.sqrt(k_struct * modal_mass)))
    a_vertical = (vertical_envelope(f_vertical) * materials.vertical_pedestrian_load * width * shape
                  / (2.0 * zeta_vertical * modal_mass))

    lateral_inertia = geometry.deck_area * width ** 2 / 12.0
    k_lat_struct = materials.elastic_modulus * lateral_inertia * (math.pi / span) ** 4 * span / 2.0
    k_lateral = k_lat_struct + 2.0 * geometry.link_k_transversal
    f_lateral = math.sqrt(k_lateral / modal_mass) / (2.0 * math.pi)
    zeta_lateral = min(1.0, materials.structural_damping
                       + 2.0 * geometry.link_c_transversal / (2.0 * math.sqrt(k_lat_struct * modal_mass)))
    a_lateral = (lateral_envelope(f_lateral) * materials.lateral_pedestrian_load * width * shape
                 / (2.0 * zeta_lateral * modal_mass))

    logger.debug(
        f"comfort: vertical {f_vertical:.2f} Hz zeta {zeta_vertical:.3f} a {a_vertical:.3f}, "
        f"lateral {f_lateral:.2f} Hz zeta {zeta_lateral:.3f} a {a_lateral:.3f}"
    )
    return max(a_vertical / materials.vertical_acceleration_limit,
               a_lateral / materials.lateral_acceleration_limit)


def constraints(model, dead, live, materials=Materials()):
    """
    Demand/capacity ratio of every constraint.

    Args:
        model (StructuralModel): Analyzed bridge model.
        dead (AnalysisResult): Dead-load analysis.
        live (AnalysisResult): Dead plus live-load analysis.
        materials (Materials): Capacities and limits.

    Returns:
        dict[str, float]: One ratio per name in CONSTRAINT_NAMES.
    """
    geometry = model.geometry
    steel = materials.allowable_steel_stress
    deck = model.frame_is_deck
    ratios = dict.fromkeys(CONSTRAINT_NAMES, 0.0)

    for result in (dead, live):
        stress = (result.frame_axial / model.frame_area
                  + result.frame_moment * model.frame_fiber / model.frame_inertia)
        if deck.any():
            ratios["deck_stress"] = max(ratios["deck_stress"], utilization(float(stress[deck].max()), steel))
        if (~deck).any():
            ratios["tower_stress"] = max(ratios["tower_stress"], utilization(float(stress[~deck].max()), steel))
        for force, area, prestress in zip(result.cable_forces, model.cable_area, model.cable_prestress):
            ratios["cable_stress"] = max(ratios["cable_stress"],
                                         utilization(force / area, materials.allowable_cable_stress))
            ratios["cable_slack"] = max(ratios["cable_slack"],
                                        slack_ratio(force, prestress, materials.slack_fraction))

    x = model.nodes[model.deck_nodes, 0]
    deflection = np.abs(live.vertical(model.deck_nodes) - dead.vertical(model.deck_nodes))
    in_central = (x > geometry.lateral_span) & (x < geometry.total_length - geometry.lateral_span)
    limit = np.where(in_central, geometry.central_span, geometry.lateral_span) / materials.deflection_divisor
    ratios["deck_deflection"] = float(np.max(deflection / limit))

    if materials.comfort:
        central_deflection = float(deflection[in_central].max()) if in_central.any() else 0.0
        ratios["comfort_acceleration"] = comfort_ratio(geometry, materials, central_deflection)
    return {name: float(value) for name, value in ratios.items()}


def evaluate(genes, fixed=FixedParams(), materials=Materials(), elements_per_bay=None):
    """
    Cost and constraint ratios of one design.

    Args:
        genes (array-like): In-domain design vector (callers repair first).
        fixed (FixedParams): Fixed bridge dimensions.
        materials (Materials): Prices, capacities and loads.
        elements_per_bay (int, optional): Mesh override.

    Returns:
        EvaluationResult: A singular analysis gives ``s_max = inf`` with the
            geometric cost, never an exception.
    """
    geometry = decode(genes, fixed)
    total = cost(geometry, materials)
    try:
        model = build_model(geometry, materials, elements_per_bay)
        dead = analyze(model, dead_case())
        live = analyze(model, live_case(materials, geometry))
    except AnalysisSingular as e:
        logger.warning(f"Singular analysis, reporting s_max = inf: {e}")
        return EvaluationResult.singular_result(total)
    ratios = constraints(model, dead, live, materials)
    if not all(math.isfinite(v) for v in ratios.values()):
        logger.warning(f"Non-finite constraint ratios {ratios}, reporting s_max = inf")
        return EvaluationResult.singular_result(total)
    return EvaluationResult.from_ratios(total, ratios)


class Evaluator:
    """
    Picklable callable bound to one set of fixed parameters and materials.

    Args:
        fixed (FixedParams): Fixed bridge dimensions.
        materials (Materials): Prices, capacities and loads.
        elements_per_bay (int, optional): Mesh override.
    """

    def __init__(self, fixed=FixedParams(), materials=Materials(), elements_per_bay=None):
        self.fixed = fixed
        self.materials = materials
        self.elements_per_bay = elements_per_bay

    def __call__(self, genes):
        return evaluate(genes, self.fixed, self.materials, self.elements_per_bay)
