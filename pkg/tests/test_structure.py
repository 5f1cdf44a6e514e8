import numpy as np
import pytest

from bridgeopt.design_space import decode
from bridgeopt.exceptions import AnalysisSingular
from bridgeopt.models import Materials
from bridgeopt.structure import (
    DOFS_PER_NODE,
    LoadCase,
    analyze,
    build_model,
    dead_case,
    live_case,
    simply_supported_beam,
)

E = 210e9


@pytest.fixture
def reference_model(reference_genes):
    return build_model(decode(reference_genes))


def test_unloaded_model_does_not_move(reference_model):
    result = analyze(reference_model, LoadCase("empty", self_weight=False, prestress=False))
    assert np.all(result.displacements == 0.0)
    assert np.all(result.cable_forces == 0.0)


def test_midspan_point_load_matches_beam_theory():
    length, inertia, load = 12.0, 3.0e-4, 50e3
    beam = simply_supported_beam(length, area=0.02, inertia=inertia, n_elements=10)
    case = LoadCase("point", self_weight=False, prestress=False, point_loads=((5, 1, -load),))
    result = analyze(beam, case)
    expected = load * length ** 3 / (48.0 * E * inertia)
    assert -result.vertical([5])[0] == pytest.approx(expected, rel=1e-6)


def test_uniform_load_matches_beam_theory():
    length, inertia, w = 20.0, 5.0e-4, 8e3
    beam = simply_supported_beam(length, area=0.02, inertia=inertia, n_elements=10)
    result = analyze(beam, LoadCase("uniform", line_load=w, self_weight=False, prestress=False))
    expected = 5.0 * w * length ** 4 / (384.0 * E * inertia)
    assert -result.vertical([5])[0] == pytest.approx(expected, rel=1e-6)
    # both supports carry half the load
    assert result.reactions[1] == pytest.approx(w * length / 2.0, rel=1e-9)
    assert result.reactions[DOFS_PER_NODE * 10 + 1] == pytest.approx(w * length / 2.0, rel=1e-9)


def test_model_layout(reference_model, reference_genes):
    geometry = decode(reference_genes)
    n = geometry.cable_count
    assert len(reference_model.cables) == 4 * n
    assert len(reference_model.deck_nodes) == (4 * n + 3) * Materials().elements_per_bay + 1
    deck_x = reference_model.nodes[reference_model.deck_nodes, 0]
    assert deck_x[0] == 0.0 and deck_x[-1] == pytest.approx(220.0)
    assert np.all(np.diff(deck_x) > 0)
    assert np.all(reference_model.cable_prestress > 0)
    assert np.all(reference_model.cable_area > 0)


def test_elements_per_bay_override(reference_genes):
    geometry = decode(reference_genes)
    coarse = build_model(geometry, elements_per_bay=2)
    assert len(coarse.deck_nodes) == (4 * geometry.cable_count + 3) * 2 + 1


def test_symmetric_bridge_gives_symmetric_reactions(reference_model):
    result = analyze(reference_model, dead_case())
    last = reference_model.deck_nodes[-1]
    left = result.reactions[1]
    right = result.reactions[DOFS_PER_NODE * last + 1]
    assert left != 0.0
    assert right == pytest.approx(left, rel=1e-9)
    bases = np.flatnonzero(reference_model.nodes[:, 1] < 0.0)
    assert len(bases) == 2
    left_base, right_base = DOFS_PER_NODE * bases + 1
    assert result.reactions[right_base] == pytest.approx(result.reactions[left_base], rel=1e-9)


def test_stays_never_carry_compression(reference_model):
    for case in (dead_case(), live_case(Materials(), reference_model.geometry)):
        result = analyze(reference_model, case)
        assert np.all(result.cable_forces >= 0.0)
        assert np.all(result.cable_forces[~result.active_cables] == 0.0)


def test_uplift_switches_every_stay_off(reference_model, mid_genes):
    uplift = LoadCase("uplift", line_load=-5e3 * 4, self_weight=False, prestress=False)
    for model in (reference_model, build_model(decode(mid_genes))):
        result = analyze(model, uplift)
        assert not result.active_cables.any()
        assert result.iterations <= len(model.cables) + 1
        bare = analyze(model.without_cables(), uplift)
        np.testing.assert_allclose(
            result.vertical(model.deck_nodes), bare.vertical(model.deck_nodes), rtol=1e-9, atol=1e-15
        )


def _check_equilibrium(designs):
    checked = 0
    for genes in designs:
        geometry = decode(genes)
        model = build_model(geometry)
        try:
            results = [analyze(model, dead_case()), analyze(model, live_case(Materials(), geometry))]
        except AnalysisSingular:
            continue
        for result in results:
            assert result.residual <= 1e-8
        checked += 1
    return checked


def test_equilibrium_residual_on_random_designs(domains, rng):
    designs = [domains.sample_uniform(rng) for _ in range(25)]
    assert _check_equilibrium(designs) >= 20


@pytest.mark.slow
def test_equilibrium_residual_on_1000_random_designs(domains):
    rng = np.random.default_rng(2024)
    designs = [domains.sample_uniform(rng) for _ in range(1000)]
    assert _check_equilibrium(designs) >= 900


def test_singular_system_is_reported():
    beam = simply_supported_beam(10.0, area=0.01, inertia=1e-4, n_elements=4)
    beam.fixed_dofs = np.array([1])
    with pytest.raises(AnalysisSingular):
        analyze(beam, LoadCase("point", self_weight=False, prestress=False, point_loads=((2, 1, -1.0),)))
