import dataclasses

import numpy as np
import pytest

from bridgeopt.benchmarks import NormalizedSphere, minimize, rosenbrock, sphere
from bridgeopt.cmaes import CMAESState, run_cmaes, snapshot_path, strategy_constants, validate_cmaes_config
from bridgeopt.exceptions import ConfigError, DimensionMismatch
from bridgeopt.models import CMAESConfig
from bridgeopt.utils import load_json

SMALL = CMAESConfig(mu=3, lam=6, sigma0=0.3, generations=5, seed=2, log_every=0)


def test_strategy_constants():
    state = CMAESState(np.full(22, 0.5), 0.5, 25, 50)
    weights = state.weights
    assert np.all(weights > 0)
    assert np.all(np.diff(weights) < 0)
    assert weights.sum() == pytest.approx(1.0)
    assert 1.0 < state.mueff < 25.0
    assert state.eigen_gap == 1
    assert 0 < state.c1 + state.cmu <= 1


def test_ask_stays_in_the_unit_cube(rng):
    state = CMAESState(np.full(5, 0.9), 2.0, 3, 6)
    for _ in range(50):
        candidates = state.ask(rng)
        assert candidates.shape == (6, 5)
        assert np.all((candidates >= 0.0) & (candidates <= 1.0))


def test_tiny_step_size_samples_the_mean(rng):
    mean = np.linspace(0.2, 0.8, 7)
    state = CMAESState(mean, 1e-12, 3, 6)
    np.testing.assert_allclose(state.ask(rng), np.tile(mean, (6, 1)), atol=1e-10)


def test_sample_mean(rng):
    mean = np.full(5, 0.5)
    state = CMAESState(mean, 0.1, 3, 6)
    samples = state.sample(rng, 100_000)
    standard_error = 0.1 / np.sqrt(100_000)
    assert np.all(np.abs(samples.mean(axis=0) - mean) < 4 * standard_error)


def test_sample_covariance_follows_c(rng):
    state = CMAESState(np.full(3, 0.5), 0.2, 3, 6)
    state.C = np.array([[1.0, 0.6, 0.0], [0.6, 2.0, -0.3], [0.0, -0.3, 0.5]])
    state.update_eigensystem(force=True)
    samples = state.sample(rng, 100_000)
    expected = state.sigma ** 2 * state.C
    assert np.max(np.abs(np.cov(samples.T) - expected)) <= 0.05 * np.max(np.abs(expected))


def test_identical_candidates_move_the_mean_onto_them():
    state = CMAESState(np.full(4, 0.5), 0.3, 3, 6)
    point = np.array([0.1, 0.2, 0.3, 0.4])
    state.tell(np.tile(point, (6, 1)), np.arange(6.0))
    np.testing.assert_allclose(state.mean, point, rtol=1e-12)


def test_tell_rejects_bad_shapes():
    state = CMAESState(np.full(4, 0.5), 0.3, 3, 6)
    with pytest.raises(DimensionMismatch):
        state.tell(np.zeros((5, 4)), np.zeros(5))
    with pytest.raises(DimensionMismatch):
        state.tell(np.zeros((6, 3)), np.zeros(6))
    with pytest.raises(DimensionMismatch):
        state.tell(np.zeros((6, 4)), np.zeros(7))


def test_covariance_stays_symmetric_positive_semidefinite(rng):
    state = CMAESState(np.full(5, 0.5), 0.3, 4, 8)
    for _ in range(10_000):
        state.tell(state.ask(rng), rng.random(8))
        np.testing.assert_array_equal(state.C, state.C.T)
    eigenvalues = np.linalg.eigvalsh(state.C)
    assert eigenvalues.min() >= -1e-10 * eigenvalues.max()


def test_sphere_converges():
    best, evals, _ = minimize(sphere, np.full(10, 0.5), 0.3, -5.0, 5.0, 10_000, seed=1, target=1e-10)
    assert best <= 1e-10
    assert evals <= 10_000


def test_rosenbrock_22d_converges():
    results = [
        minimize(rosenbrock, np.full(22, 2.5), 4.5, -5.0, 10.0, 400_000, seed=seed, lam=50, mu=25, target=1e-6)
        for seed in (1, 2)
    ]
    assert min(best for best, _, _ in results) <= 1e-6


def test_run_uses_exactly_the_budget(domains):
    seen = []
    sphere_evaluator = NormalizedSphere(domains)

    def recording(genes):
        seen.append(np.array(genes, copy=True))
        return sphere_evaluator(genes)

    log = run_cmaes(SMALL, recording, domains=domains)
    assert log.evaluations == SMALL.evaluations == len(seen) == 30
    assert [r.generation for r in log.records] == list(range(5))
    assert all(domains.is_within(genes) for genes in seen)


def test_best_so_far_never_decreases_and_is_deterministic(domains):
    cfg = dataclasses.replace(SMALL, generations=40)
    first = run_cmaes(cfg, NormalizedSphere(domains), domains=domains)
    again = run_cmaes(cfg, NormalizedSphere(domains), domains=domains)
    best = [r.best_fitness for r in first.records]
    assert best == sorted(best)
    assert first.records == again.records
    np.testing.assert_array_equal(first.best_genes, again.best_genes)


def test_resumed_run_matches_uninterrupted_run(tmp_path, domains):
    sphere_evaluator = NormalizedSphere(domains)
    full = run_cmaes(dataclasses.replace(SMALL, generations=6), sphere_evaluator, domains=domains)

    first_half = dataclasses.replace(SMALL, generations=3, snapshot_every=3)
    run_cmaes(first_half, sphere_evaluator, domains=domains, snapshot_dir=str(tmp_path))
    path = snapshot_path(str(tmp_path), SMALL.seed)
    resumed = run_cmaes(dataclasses.replace(SMALL, generations=6), sphere_evaluator, domains=domains, resume=path)

    assert resumed.records == full.records
    np.testing.assert_array_equal(resumed.best_genes, full.best_genes)


def test_ill_conditioned_covariance_restarts():
    state = CMAESState(np.full(4, 0.5), 0.3, 3, 6)
    state.sigma = 1e-3
    state.C = np.diag([1.0, 1.0, 1.0, 1e-16])
    state.update_eigensystem(force=True)
    assert state.restarts == 1
    assert state.sigma == 0.3
    np.testing.assert_array_equal(state.C, np.eye(4))
    np.testing.assert_array_equal(state.mean, np.full(4, 0.5))


def test_snapshot_round_trip_keeps_the_state(rng):
    state = CMAESState(np.full(4, 0.5), 0.3, 3, 6)
    for _ in range(5):
        state.tell(state.ask(rng), rng.random(6))
    restored = CMAESState.from_snapshot(state.snapshot())
    np.testing.assert_array_equal(restored.C, state.C)
    np.testing.assert_array_equal(restored.mean, state.mean)
    assert restored.sigma == state.sigma
    assert restored.generation == state.generation == 5


def test_default_constants_at_22_genes():
    constants = strategy_constants(CMAESConfig(), 22)
    assert constants["mu"] == 25 and constants["lam"] == 50
    assert len(constants["weights"]) == 25
    assert constants["mueff"] == pytest.approx(13.951320940285154, rel=1e-12)
    assert constants["cc"] == pytest.approx(0.1699464443441838, rel=1e-12)
    assert constants["cs"] == pytest.approx(0.38951908202290286, rel=1e-12)
    assert constants["c1"] == pytest.approx(0.003591687478621, rel=1e-12)
    assert constants["cmu"] == pytest.approx(0.04075929085704628, rel=1e-12)
    assert constants["damps"] == pytest.approx(1.247571919634309, rel=1e-12)
    assert constants["eigen_gap"] == 1


def test_snapshot_file_records_the_constants(tmp_path, domains):
    cfg = dataclasses.replace(SMALL, generations=2, snapshot_every=2)
    run_cmaes(cfg, NormalizedSphere(domains), domains=domains, snapshot_dir=str(tmp_path))
    document = load_json(snapshot_path(str(tmp_path), cfg.seed))
    assert document["state"]["constants"] == strategy_constants(cfg, 22)


@pytest.mark.parametrize(
    "cfg, message",
    [
        (CMAESConfig(mu=60, lam=50), "mu 60 exceeds lambda 50"),
        (CMAESConfig(sigma0=0.0), "sigma0"),
        (CMAESConfig(snapshot_every=-1), "snapshot_every"),
    ],
)
def test_invalid_config(cfg, message):
    with pytest.raises(ConfigError) as e:
        validate_cmaes_config(cfg)
    assert message in e.value.detail
