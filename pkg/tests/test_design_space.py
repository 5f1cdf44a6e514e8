import json

import numpy as np
import pytest

from bridgeopt.design_space import N_GENES, cable_count, decode, hollow_section, load_domains
from bridgeopt.exceptions import ConfigError, IoError
from bridgeopt.models import FixedParams


def test_table_has_22_ordered_entries(domains):
    assert len(domains) == N_GENES
    assert [g.index for g in domains.genes] == list(range(N_GENES))
    assert np.all(domains.lower < domains.upper)


def test_table_values(domains):
    assert (domains.lower[0], domains.upper[0]) == (3.0, 7.0)
    assert (domains.lower[5], domains.upper[5]) == (0.1, 2.0)
    for i in range(9, 13):
        assert (domains.lower[i], domains.upper[i]) == (0.001, 1000.0)
    assert domains.index_of("cable_area") == 21


def test_sample_uniform_is_within_domain_and_seeded(domains):
    first = domains.sample_uniform(np.random.default_rng(3))
    again = domains.sample_uniform(np.random.default_rng(3))
    assert domains.is_within(first)
    np.testing.assert_array_equal(first, again)


def test_sample_uniform_mean_of_dv5(domains, rng):
    samples = np.array([domains.sample_uniform(rng)[5] for _ in range(100_000)])
    assert samples.mean() == pytest.approx(1.05, abs=0.01)


def test_clamp_examples(domains):
    genes = domains.midpoint()
    genes[5] = 2.5
    genes[9] = -4.0
    clamped = domains.clamp(genes)
    assert clamped[5] == 2.0
    assert clamped[9] == 0.001
    inside = domains.midpoint()
    np.testing.assert_array_equal(domains.clamp(inside), inside)


def test_clamp_is_idempotent_projection(domains, rng):
    for _ in range(200):
        v = domains.midpoint() + rng.normal(0.0, 1.0, N_GENES) * domains.span * 3.0
        once = domains.clamp(v)
        np.testing.assert_array_equal(domains.clamp(once), once)
        assert domains.is_within(once)
        inside = (v >= domains.lower) & (v <= domains.upper)
        np.testing.assert_array_equal(once[inside], v[inside])


def test_is_within(domains):
    genes = domains.midpoint()
    assert domains.is_within(genes)
    genes[0] = 7.2
    assert not domains.is_within(genes)
    assert not domains.is_within(domains.midpoint()[:21])


def test_describe_names_each_offending_gene(domains):
    genes = domains.midpoint()
    genes[5] = 2.5
    genes[9] = -1.0
    problems = domains.describe(genes)
    assert len(problems) == 2
    assert problems[0].startswith("DV5 (tower_height)")
    assert problems[1].startswith("DV9 (link_k_transversal)")
    assert domains.describe([1.0, 2.0]) == ["expected 22 genes, got 2"]


def test_unit_maps_are_inverse(domains, rng):
    genes = domains.sample_uniform(rng)
    unit = domains.to_unit(genes)
    assert np.all((unit >= 0.0) & (unit <= 1.0))
    np.testing.assert_allclose(domains.from_unit(unit), genes, rtol=1e-12)


@pytest.mark.parametrize("dv0, expected", [(3.0, 3), (4.49, 4), (4.5, 5), (5.5, 6), (6.5, 7), (7.0, 7)])
def test_cable_count_rounds_half_up(dv0, expected):
    assert cable_count(dv0) == expected


def test_cable_count_is_monotone():
    values = np.linspace(3.0, 7.0, 401)
    counts = [cable_count(v) for v in values]
    assert counts == sorted(counts)


def test_decode_reference_central_span(domains):
    genes = domains.midpoint()
    genes[1] = 1.0
    geometry = decode(genes)
    assert geometry.central_span == 110.0
    assert geometry.lateral_span == 55.0


def test_decode_dv0_quantization(domains):
    genes = domains.midpoint()
    genes[0] = 4.49
    assert decode(genes).cable_count == 4
    genes[0] = 4.5
    assert decode(genes).cable_count == 5


def test_decode_invariants_over_random_designs(domains, rng):
    for _ in range(300):
        g = decode(domains.sample_uniform(rng))
        assert 2 * g.lateral_span + g.central_span == 220.0
        assert g.cable_count in (3, 4, 5, 6, 7)
        lateral = np.array(g.lateral_anchorages)
        central = np.array(g.central_anchorages)
        assert np.all(np.diff(lateral) > 0) and 0 < lateral[0] and lateral[-1] < g.lateral_span
        assert np.all(np.diff(central) > 0) and 0 < central[0] and central[-1] < g.central_span / 2
        assert np.all(np.diff(g.deck_anchorages_x) > 0)
        assert len(g.cable_heights) == g.cable_count
        assert g.tower_leg_area > 0 and g.tower_leg_inertia > 0 and g.cable_area > 0


def test_decode_is_deterministic(reference_genes):
    assert decode(reference_genes) == decode(reference_genes.copy())


def test_decode_uses_fixed_params(domains):
    geometry = decode(domains.midpoint(), FixedParams(total_length=300.0, deck_width=5.0))
    assert 2 * geometry.lateral_span + geometry.central_span == pytest.approx(300.0)
    assert geometry.deck_width == 5.0


def test_hollow_section_closes_to_solid():
    area, inertia = hollow_section(1.0, 0.1, 0.6, 0.001)
    assert area == pytest.approx(0.1)
    assert inertia == pytest.approx(1.0 * 0.1 ** 3 / 12.0)
    hollow_area, _ = hollow_section(1.0, 1.0, 0.01, 0.01)
    assert hollow_area == pytest.approx(1.0 - 0.98 * 0.98)


def test_load_domains_missing_file_names_path(tmp_path):
    path = tmp_path / "nope.json"
    with pytest.raises(IoError) as e:
        load_domains(str(path))
    assert str(path) in e.value.detail


def test_load_domains_rejects_bad_table(tmp_path, domains):
    genes = [
        {"index": g.index, "name": g.name, "lower": g.lower, "upper": g.upper, "kind": g.kind}
        for g in domains.genes
    ]
    genes[3]["lower"] = 5.0
    del genes[21]
    path = tmp_path / "domains.json"
    path.write_text(json.dumps({"genes": genes}))
    with pytest.raises(ConfigError) as e:
        load_domains(str(path))
    assert "DV3 needs lower < upper" in e.value.detail
    assert "missing indices [21]" in e.value.detail
    assert str(path) in e.value.detail
