"""
Planar frame model of the footbridge and its linear static solve.

The deck is a chain of Euler-Bernoulli frame elements pinned at both
abutments, each tower is a column fixed below the deck, and the stays are
tension-only bars. Node dofs are ordered (u, v, rotation), global x along
the deck and y upwards.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from bridgeopt.exceptions import AnalysisSingular
from bridgeopt.models import Materials

logger = logging.getLogger("bridgeopt")

DOFS_PER_NODE = 3
PIVOT_RATIO_LIMIT = 1e14


@dataclass(frozen=True)
class LoadCase:
    """
    Loads applied in one static analysis.

    Args:
        name (str): Label used in logs.
        line_load (float): Extra downward load on every deck element, N/m.
        self_weight (bool): Apply deck, slab and tower weight.
        prestress (bool): Apply the cable prestress forces.
        point_loads (tuple): ``(node, dof, force)`` triples in global axes.
    """

    name: str
    line_load: float = 0.0
    self_weight: bool = True
    prestress: bool = True
    point_loads: tuple = ()


def dead_case():
    return LoadCase("dead")


def live_case(materials, geometry):
    return LoadCase("live", line_load=materials.live_load * geometry.deck_width)


@dataclass(frozen=True)
class LinkSpring:
    node_a: int
    node_b: int
    dof: int
    stiffness: float


@dataclass
class StructuralModel:
    """
    Nodes, members and supports of one planar model.

    Frame properties are arrays indexed like ``frames``; cable properties
    are indexed like ``cables`` whose first column is the deck node.
    """

    nodes: np.ndarray
    frames: np.ndarray
    frame_area: np.ndarray
    frame_inertia: np.ndarray
    frame_fiber: np.ndarray
    frame_is_deck: np.ndarray
    cables: np.ndarray
    cable_area: np.ndarray
    cable_prestress: np.ndarray
    springs: tuple
    fixed_dofs: np.ndarray
    deck_nodes: np.ndarray
    deck_weight: float
    elastic_modulus: float = 210e9
    steel_density: float = 7850.0
    gravity: float = 9.81
    geometry: object = None
    _frame: dict = field(init=False, repr=False)
    _cable: dict = field(init=False, repr=False)

    def __post_init__(self):
        self._frame = _frame_matrices(self.nodes, self.frames, self.frame_area,
                                      self.frame_inertia, self.elastic_modulus)
        self._cable = _cable_geometry(self.nodes, self.cables, self.cable_area, self.elastic_modulus)

    @property
    def n_dofs(self):
        return DOFS_PER_NODE * len(self.nodes)

    @property
    def free_dofs(self):
        mask = np.ones(self.n_dofs, dtype=bool)
        mask[self.fixed_dofs] = False
        return np.flatnonzero(mask)

    @property
    def cable_lengths(self):
        return self._cable["length"]

    def without_cables(self):
        """Copy of this model with every stay removed."""
        return StructuralModel(
            nodes=self.nodes, frames=self.frames, frame_area=self.frame_area,
            frame_inertia=self.frame_inertia, frame_fiber=self.frame_fiber,
            frame_is_deck=self.frame_is_deck, cables=np.zeros((0, 2), dtype=int),
            cable_area=np.zeros(0), cable_prestress=np.zeros(0), springs=self.springs,
            fixed_dofs=self.fixed_dofs, deck_nodes=self.deck_nodes,
            deck_weight=self.deck_weight, elastic_modulus=self.elastic_modulus,
            steel_density=self.steel_density, gravity=self.gravity, geometry=self.geometry,
        )


@dataclass
class AnalysisResult:
    case: LoadCase
    displacements: np.ndarray
    cable_forces: np.ndarray
    active_cables: np.ndarray
    frame_forces: np.ndarray  # local end forces (N1, V1, M1, N2, V2, M2)
    frame_axial: np.ndarray
    frame_moment: np.ndarray
    reactions: np.ndarray
    residual: float
    iterations: int

    def vertical(self, nodes):
        return self.displacements[DOFS_PER_NODE * np.asarray(nodes) + 1]


def _frame_matrices(nodes, frames, area, inertia, elastic_modulus):
    frames = np.asarray(frames, dtype=int).reshape(-1, 2)
    delta = nodes[frames[:, 1]] - nodes[frames[:, 0]]
    length = np.hypot(delta[:, 0], delta[:, 1])
    c = delta[:, 0] / length
    s = delta[:, 1] / length
    ea = elastic_modulus * area / length
    ei = elastic_modulus * inertia
    b1 = 12.0 * ei / length ** 3
    b2 = 6.0 * ei / length ** 2
    b3 = 4.0 * ei / length
    b4 = 2.0 * ei / length

    k = np.zeros((len(frames), 6, 6))
    k[:, 0, 0] = k[:, 3, 3] = ea
    k[:, 0, 3] = k[:, 3, 0] = -ea
    k[:, 1, 1] = k[:, 4, 4] = b1
    k[:, 1, 4] = k[:, 4, 1] = -b1
    k[:, 1, 2] = k[:, 2, 1] = k[:, 1, 5] = k[:, 5, 1] = b2
    k[:, 2, 4] = k[:, 4, 2] = k[:, 4, 5] = k[:, 5, 4] = -b2
    k[:, 2, 2] = k[:, 5, 5] = b3
    k[:, 2, 5] = k[:, 5, 2] = b4

    t = np.zeros((len(frames), 6, 6))
    for offset in (0, 3):
        t[:, offset, offset] = c
        t[:, offset, offset + 1] = s
        t[:, offset + 1, offset] = -s
        t[:, offset + 1, offset + 1] = c
        t[:, offset + 2, offset + 2] = 1.0
    kg = np.einsum("npi,npq,nqj->nij", t, k, t)

    a, b = frames[:, 0], frames[:, 1]
    dofs = np.column_stack([3 * a, 3 * a + 1, 3 * a + 2, 3 * b, 3 * b + 1, 3 * b + 2])
    return {"length": length, "local": k, "transform": t, "global": kg, "dofs": dofs}


def _cable_geometry(nodes, cables, area, elastic_modulus):
    cables = np.asarray(cables, dtype=int).reshape(-1, 2)
    delta = nodes[cables[:, 1]] - nodes[cables[:, 0]]
    length = np.hypot(delta[:, 0], delta[:, 1])
    c = delta[:, 0] / length
    s = delta[:, 1] / length
    a, b = cables[:, 0], cables[:, 1]
    return {
        "length": length,
        "stiffness": elastic_modulus * np.asarray(area, dtype=float) / length,
        "direction": np.column_stack([-c, -s, c, s]),
        "dofs": np.column_stack([3 * a, 3 * a + 1, 3 * b, 3 * b + 1]),
    }


def build_model(geometry, materials=Materials(), elements_per_bay=None, with_cables=True):
    """
    Build the planar model of a decoded bridge.

    Deck key points are the abutments, every cable anchorage and the two
    towers; each bay between key points gets ``elements_per_bay`` frame
    elements. Each tower lumps its two legs into one column with nodes at
    its fixed base, at deck level and at every anchorage height; the deck
    rests on the tower through the vertical link spring. Cable prestress
    balances the permanent deck load over the tributary length of its
    anchorage, scaled by the prestress factor.

    Args:
        geometry (BridgeGeometry): Decoded design.
        materials (Materials): Elastic modulus, densities and gravity.
        elements_per_bay (int, optional): Overrides ``materials.elements_per_bay``.
        with_cables (bool): Leave the stays out when False.

    Returns:
        StructuralModel: The assembled model.
    """
    per_bay = int(elements_per_bay or materials.elements_per_bay)
    n = geometry.cable_count
    length = geometry.total_length
    lateral = geometry.lateral_span

    half = [0.0] + list(geometry.lateral_anchorages) + [lateral] + [
        lateral + p for p in geometry.central_anchorages
    ]
    keys = half + [length - x for x in reversed(half)]

    nodes = []
    for left, right in zip(keys, keys[1:]):
        for j in range(per_bay):
            nodes.append((left + (right - left) * j / per_bay, 0.0))
    nodes.append((length, 0.0))
    deck_nodes = np.arange(len(nodes))

    frames = [(i, i + 1) for i in range(len(deck_nodes) - 1)]
    frame_area = [geometry.deck_area] * len(frames)
    frame_inertia = [geometry.deck_inertia] * len(frames)
    frame_fiber = [geometry.deck_depth / 2.0] * len(frames)
    frame_is_deck = [True] * len(frames)

    deck_weight = (materials.steel_density * geometry.deck_area + geometry.slab_mass) * materials.gravity
    fixed = [0, 1, 3 * deck_nodes[-1], 3 * deck_nodes[-1] + 1]
    springs = []
    cables = []
    cable_area = []
    cable_prestress = []

    # key index of the tower and, per pair k (k = 0 nearest the tower), the
    # lateral and central anchorage keys
    tower_keys = (n + 1, 3 * n + 2)
    for side, tower_x in enumerate(geometry.towers_x):
        base = len(nodes)
        nodes.append((tower_x, -geometry.tower_below_deck))
        deck_level = len(nodes)
        nodes.append((tower_x, 0.0))
        anchors = []
        for height in geometry.cable_heights:
            anchors.append(len(nodes))
            nodes.append((tower_x, height))
        chain = [base, deck_level] + anchors
        for a, b in zip(chain, chain[1:]):
            frames.append((a, b))
            frame_area.append(2.0 * geometry.tower_leg_area)
            frame_inertia.append(2.0 * geometry.tower_leg_inertia)
            frame_fiber.append(geometry.tower_leg_depth / 2.0)
            frame_is_deck.append(False)
        fixed.extend([3 * base, 3 * base + 1, 3 * base + 2])
        springs.append(LinkSpring(tower_keys[side] * per_bay, deck_level, 1, geometry.link_k_vertical))

        if not with_cables:
            continue
        for k in range(n):
            if side == 0:
                pair = (n - k, n + 2 + k)  # lateral, central
            else:
                pair = (3 * n + 3 + k, 3 * n + 1 - k)
            for key in pair:
                deck_node = key * per_bay
                tributary = (keys[key + 1] - keys[key - 1]) / 2.0
                dx = tower_x - nodes[deck_node][0]
                dy = geometry.cable_heights[k]
                sine = dy / np.hypot(dx, dy)
                cables.append((deck_node, anchors[k]))
                cable_area.append(geometry.cable_area)
                cable_prestress.append(geometry.prestress_factor * deck_weight * tributary / sine)

    return StructuralModel(
        nodes=np.array(nodes, dtype=float),
        frames=np.array(frames, dtype=int),
        frame_area=np.array(frame_area, dtype=float),
        frame_inertia=np.array(frame_inertia, dtype=float),
        frame_fiber=np.array(frame_fiber, dtype=float),
        frame_is_deck=np.array(frame_is_deck, dtype=bool),
        cables=np.array(cables, dtype=int).reshape(-1, 2),
        cable_area=np.array(cable_area, dtype=float),
        cable_prestress=np.array(cable_prestress, dtype=float),
        springs=tuple(springs),
        fixed_dofs=np.array(sorted(fixed), dtype=int),
        deck_nodes=deck_nodes,
        deck_weight=float(deck_weight),
        elastic_modulus=materials.elastic_modulus,
        steel_density=materials.steel_density,
        gravity=materials.gravity,
        geometry=geometry,
    )


def simply_supported_beam(length, area, inertia, n_elements=10, elastic_modulus=210e9):
    """
    Cable-free beam pinned at x = 0 and on a roller at x = length.

    Used to check the frame element against closed-form beam theory.
    """
    x = np.linspace(0.0, length, n_elements + 1)
    nodes = np.column_stack([x, np.zeros_like(x)])
    frames = np.column_stack([np.arange(n_elements), np.arange(1, n_elements + 1)])
    return StructuralModel(
        nodes=nodes,
        frames=frames,
        frame_area=np.full(n_elements, float(area)),
        frame_inertia=np.full(n_elements, float(inertia)),
        frame_fiber=np.full(n_elements, 0.5),
        frame_is_deck=np.ones(n_elements, dtype=bool),
        cables=np.zeros((0, 2), dtype=int),
        cable_area=np.zeros(0),
        cable_prestress=np.zeros(0),
        springs=(),
        fixed_dofs=np.array([0, 1, 3 * n_elements + 1]),
        deck_nodes=np.arange(n_elements + 1),
        deck_weight=0.0,
        elastic_modulus=elastic_modulus,
    )


def _load_vector(model, case):
    loads = np.zeros(model.n_dofs)
    frame = model._frame
    w = case.line_load + (model.deck_weight if case.self_weight else 0.0)
    if w != 0.0:
        deck = model.frame_is_deck
        le = frame["length"][deck]
        dofs = frame["dofs"][deck]
        np.add.at(loads, dofs[:, 1], -w * le / 2.0)
        np.add.at(loads, dofs[:, 2], -w * le ** 2 / 12.0)
        np.add.at(loads, dofs[:, 4], -w * le / 2.0)
        np.add.at(loads, dofs[:, 5], w * le ** 2 / 12.0)
    if case.self_weight:
        tower = ~model.frame_is_deck
        weight = model.steel_density * model.frame_area[tower] * frame["length"][tower] * model.gravity
        np.add.at(loads, frame["dofs"][tower][:, 1], -weight / 2.0)
        np.add.at(loads, frame["dofs"][tower][:, 4], -weight / 2.0)
    for node, dof, force in case.point_loads:
        loads[DOFS_PER_NODE * node + dof] += force
    return loads, w


def _base_triplets(model):
    frame = model._frame
    dofs = frame["dofs"]
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    vals = frame["global"].ravel()
    spring_rows, spring_cols, spring_vals = [], [], []
    for spring in model.springs:
        a = DOFS_PER_NODE * spring.node_a + spring.dof
        b = DOFS_PER_NODE * spring.node_b + spring.dof
        spring_rows += [a, b, a, b]
        spring_cols += [a, b, b, a]
        spring_vals += [spring.stiffness, spring.stiffness, -spring.stiffness, -spring.stiffness]
    return (
        np.concatenate([rows, np.array(spring_rows, dtype=int)]),
        np.concatenate([cols, np.array(spring_cols, dtype=int)]),
        np.concatenate([vals, np.array(spring_vals, dtype=float)]),
    )


def _cable_triplets(model, active):
    cable = model._cable
    dofs = cable["dofs"][active]
    v = cable["direction"][active]
    k = cable["stiffness"][active]
    rows = np.repeat(dofs, 4, axis=1).ravel()
    cols = np.tile(dofs, (1, 4)).ravel()
    vals = (k[:, None, None] * v[:, :, None] * v[:, None, :]).ravel()
    return rows, cols, vals


def _solve(stiffness, loads, free):
    """
    Solve the constrained system with a diagonally scaled sparse LU.

    Raises:
        AnalysisSingular: on a failed factorization, a pivot ratio above
            PIVOT_RATIO_LIMIT or a non-finite solution.
    """
    k_ff = stiffness[free][:, free]
    diagonal = k_ff.diagonal()
    if not np.all(np.isfinite(diagonal)) or np.any(diagonal <= 0.0):
        raise AnalysisSingular("non-positive diagonal in the stiffness matrix")
    scale = 1.0 / np.sqrt(diagonal)
    scaling = sp.diags(scale)
    k_scaled = (scaling @ k_ff @ scaling).tocsc()
    try:
        lu = splu(k_scaled)
    except RuntimeError as e:
        raise AnalysisSingular(f"factorization failed: {e}")
    pivots = np.abs(lu.U.diagonal())
    if pivots.min() == 0.0 or pivots.max() / pivots.min() > PIVOT_RATIO_LIMIT:
        raise AnalysisSingular(f"pivot ratio {pivots.max() / max(pivots.min(), 1e-300):.3e}")

    rhs = loads[free] * scale
    y = lu.solve(rhs)
    y += lu.solve(rhs - k_scaled @ y)
    u_free = y * scale
    if not np.all(np.isfinite(u_free)):
        raise AnalysisSingular("non-finite displacements")
    u = np.zeros(len(loads))
    u[free] = u_free
    return u


def analyze(model, case):
    """
    Linear static analysis with tension-only stays.

    Compressed stays are switched off and the system is solved again until
    no active stay is in compression; a switched-off stay stays off.

    Args:
        model (StructuralModel): Model to analyze.
        case (LoadCase): Loads to apply.

    Returns:
        AnalysisResult: Displacements, member forces, reactions and the
            relative equilibrium residual.

    Raises:
        AnalysisSingular: if the constrained stiffness matrix is singular.
    """
    loads, w = _load_vector(model, case)
    free = model.free_dofs
    cable = model._cable
    n_cables = len(model.cables)
    prestress = model.cable_prestress if case.prestress else np.zeros(n_cables)
    base_rows, base_cols, base_vals = _base_triplets(model)
    active = np.ones(n_cables, dtype=bool)

    iterations = 0
    while True:
        iterations += 1
        rows, cols, vals = _cable_triplets(model, active)
        stiffness = sp.coo_matrix(
            (np.concatenate([base_vals, vals]), (np.concatenate([base_rows, rows]), np.concatenate([base_cols, cols]))),
            shape=(model.n_dofs, model.n_dofs),
        ).tocsr()
        applied = loads.copy()
        np.add.at(applied, cable["dofs"][active], -prestress[active, None] * cable["direction"][active])
        u = _solve(stiffness, applied, free)

        elongation = np.einsum("ci,ci->c", cable["direction"], u[cable["dofs"]])
        forces = np.where(active, prestress + cable["stiffness"] * elongation, 0.0)
        compressed = active & (forces < 0.0)
        if not compressed.any():
            break
        active &= ~compressed
        logger.debug(f"{case.name}: {int(compressed.sum())} stays slack, {int(active.sum())} left")

    frame = model._frame
    u_elem = u[frame["dofs"]]
    internal = np.zeros(model.n_dofs)
    magnitude = np.zeros(model.n_dofs)
    np.add.at(internal, frame["dofs"], np.einsum("nij,nj->ni", frame["global"], u_elem))
    np.add.at(magnitude, frame["dofs"], np.einsum("nij,nj->ni", np.abs(frame["global"]), np.abs(u_elem)))
    for spring in model.springs:
        a = DOFS_PER_NODE * spring.node_a + spring.dof
        b = DOFS_PER_NODE * spring.node_b + spring.dof
        stretch = spring.stiffness * (u[b] - u[a])
        internal[a] -= stretch
        internal[b] += stretch
        magnitude[a] += abs(stretch)
        magnitude[b] += abs(stretch)
    if n_cables:
        np.add.at(internal, cable["dofs"], forces[:, None] * cable["direction"])
        np.add.at(magnitude, cable["dofs"], np.abs(forces[:, None] * cable["direction"]))

    imbalance = internal - loads
    # relative to the larger of the applied loads and the summed member force magnitudes
    scale = max(np.linalg.norm(loads), np.linalg.norm(prestress), np.linalg.norm(magnitude[free]))
    residual = float(np.linalg.norm(imbalance[free]) / scale) if scale > 0 else float(np.linalg.norm(imbalance[free]))
    reactions = np.zeros(model.n_dofs)
    reactions[model.fixed_dofs] = imbalance[model.fixed_dofs]

    u_local = np.einsum("nij,nj->ni", frame["transform"], u_elem)
    end_forces = np.einsum("nij,nj->ni", frame["local"], u_local)
    le = frame["length"]
    w_elem = np.where(model.frame_is_deck, w, 0.0)
    end_forces[:, 1] += w_elem * le / 2.0
    end_forces[:, 2] += w_elem * le ** 2 / 12.0
    end_forces[:, 4] += w_elem * le / 2.0
    end_forces[:, 5] -= w_elem * le ** 2 / 12.0
    mid_moment = -end_forces[:, 2] + end_forces[:, 1] * le / 2.0 - w_elem * le ** 2 / 8.0
    axial = np.maximum(np.abs(end_forces[:, 0]), np.abs(end_forces[:, 3]))
    moment = np.max(np.abs(np.column_stack([end_forces[:, 2], end_forces[:, 5], mid_moment])), axis=1)

    return AnalysisResult(
        case=case,
        displacements=u,
        cable_forces=forces,
        active_cables=active.copy(),
        frame_forces=end_forces,
        frame_axial=axial,
        frame_moment=moment,
        reactions=reactions,
        residual=residual,
        iterations=iterations,
    )
