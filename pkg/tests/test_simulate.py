import math

import numpy as np
import pytest

import spintomo.simulate as sim
import spintomo.spincore as sc


def test_sample_directions_uniform():
    rng = np.random.default_rng(0)
    thetas, phis = sim.sample_directions(rng, 200000)
    # cos(theta) and phi are uniform; chi-square over 20 bins
    for vals, lo, hi in ((np.cos(thetas), -1.0, 1.0), (phis, 0.0, 2 * math.pi)):
        counts, _ = np.histogram(vals, bins=20, range=(lo, hi))
        expected = len(vals) / 20
        chi2 = ((counts - expected) ** 2 / expected).sum()
        assert chi2 < 60  # chi2_{19} above 60 has p < 1e-5


def test_sample_outcomes_frequencies_match_probabilities():
    two_s = 4
    rng = np.random.default_rng(1)
    rho = sc.DensityMatrix.random(two_s + 1, rng)
    n = 100000
    d = sc.Direction(0.9, 2.2)
    thetas = np.full(n, d.theta)
    phis = np.full(n, d.phi)
    idx = sim.sample_outcomes(rho, thetas, phis, rng)
    p = sc.outcome_probabilities(rho, d)
    freq = np.bincount(idx, minlength=two_s + 1) / n
    sigma = np.sqrt(p * (1 - p) / n)
    assert np.all(np.abs(freq - p) <= 4 * sigma + 1e-12)


def test_run_experiment_reproducible():
    rho = sc.DensityMatrix.from_pure(sc.coherent_state(2, 1.0))
    cfg = sim.ExperimentConfig(rho, 1000, seed=9)
    a = sim.run_experiment(cfg)
    b = sim.run_experiment(cfg)
    assert np.array_equal(a.thetas, b.thetas)
    assert np.array_equal(a.m, b.m)
    c = sim.run_experiment(sim.ExperimentConfig(rho, 1000, seed=10))
    assert not np.array_equal(a.m, c.m)


def test_full_shards_share_a_prefix():
    # shard-major generation: runs spanning whole shards agree shard by
    # shard, so a two-shard run starts with the one-shard run's records
    rho = sc.DensityMatrix.from_pure(sc.coherent_state(2, 1.0))
    n = sim.SHARD_SIZE
    one = sim.run_experiment(sim.ExperimentConfig(rho, n, num_blocks=2, seed=4))
    two = sim.run_experiment(sim.ExperimentConfig(rho, 2 * n, num_blocks=2, seed=4))
    assert np.array_equal(one.thetas, two.thetas[:n])
    assert np.array_equal(one.m, two.m[:n])


def test_experiment_config_validation():
    rho = sc.DensityMatrix.from_pure(sc.coherent_state(1, 0.5))
    with pytest.raises(ValueError):
        sim.ExperimentConfig(rho, 1001, num_blocks=10)
    with pytest.raises(ValueError):
        sim.ExperimentConfig(rho, 100, num_blocks=1)
    with pytest.raises(ValueError):
        sim.ExperimentConfig(rho, 100, scheme="nope")


def test_discrete_scheme_round_robin():
    rho = sc.DensityMatrix.from_pure(sc.coherent_state(1, 1.0))
    rec = sim.run_experiment(sim.ExperimentConfig(rho, 300, seed=0,
                                                  scheme="pauli_half"))
    # axes cycle x, y, z with equal counts
    uniq = np.unique(np.round(np.c_[rec.thetas, rec.phis], 12), axis=0)
    assert len(uniq) == 3


def test_discrete_scheme_spin_mismatch():
    rho = sc.DensityMatrix.from_pure(sc.coherent_state(4, 1.0))
    with pytest.raises(ValueError):
        sim.run_experiment(sim.ExperimentConfig(rho, 100, seed=0,
                                                scheme="pauli_half"))


def test_plan_field_presets():
    b_e = abs(sim.plan_field(math.pi, sim.ApparatusParams.electron()))
    b_n = abs(sim.plan_field(math.pi, sim.ApparatusParams.nucleon()))
    assert 3.0 <= b_e <= 300.0
    assert 30.0 <= b_n <= 3e4
    assert sim.plan_field(0.0, sim.ApparatusParams.electron()) == 0.0


def test_plan_field_linear_in_theta():
    params = sim.ApparatusParams.from_beam(1e5, 1e6, 2.0)
    assert sim.plan_field(2.0, params) == pytest.approx(2 * sim.plan_field(1.0, params))


def test_apparatus_params_validation():
    with pytest.raises(ValueError):
        sim.ApparatusParams(gamma=0.0, transit_time=1.0)
    with pytest.raises(ValueError):
        sim.ApparatusParams.from_beam(1e5, -1.0, 1.0)


def test_coupled_rejects_asymmetric_state():
    psi = np.zeros(4, dtype=complex)
    psi[1] = 1.0  # bare |du> is not exchange symmetric
    rho = sc.DensityMatrix.from_pure(psi)
    with pytest.raises(ValueError):
        sim.run_coupled_experiment(rho, 100, seed=0, num_spins=2)


def test_coupled_probabilities_sum_to_one():
    rng = np.random.default_rng(3)
    rho = sc.symmetrize(sc.DensityMatrix.random(4, rng), 2)
    outcomes, probs = sim.coupled_outcome_probabilities(rho, sc.Direction(1.0, 0.5), 2)
    assert np.isclose(probs.sum(), 1.0)
    assert set(outcomes) == {(0.0, 0.0), (1.0, -1.0), (1.0, 0.0), (1.0, 1.0)}


def test_coupled_singlet_weight_is_direction_independent():
    rng = np.random.default_rng(8)
    rho = sc.symmetrize(sc.DensityMatrix.random(4, rng), 2)
    basis = sc.coupled_basis(2)
    singlet_block = [b for b in basis.blocks if b.two_S == 0][0]
    w = basis.to_coupled(rho)[singlet_block.start, singlet_block.start].real
    for d in (sc.Z_AXIS, sc.X_AXIS, sc.Direction(0.3, 4.0)):
        outcomes, probs = sim.coupled_outcome_probabilities(rho, d, 2)
        assert probs[outcomes.index((0.0, 0.0))] == pytest.approx(w, abs=1e-10)


def test_apparatus_probabilities_normalized():
    rng = np.random.default_rng(11)
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    v /= np.linalg.norm(v)
    p = sim.apparatus_probabilities(v)
    total = sum(p[d] for d in sim.DETECTORS)
    assert total == pytest.approx(1.0, abs=1e-12)
    assert p["B"] == pytest.approx(abs(v[3]) ** 2)
    assert p["C"] == pytest.approx(abs(v[1]) ** 2)


def test_invert_apparatus_exact():
    rng = np.random.default_rng(12)
    for _ in range(10):
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        v /= np.linalg.norm(v)
        p = sim.apparatus_probabilities(v)
        gs2, g0a2, clipped = sim.invert_apparatus(p["pA"], p["pS"])
        assert not clipped
        assert gs2 == pytest.approx(abs(v[0]) ** 2, abs=1e-12)
        assert g0a2 == pytest.approx(abs(v[2]) ** 2, abs=1e-12)


def test_invert_apparatus_clips_noise():
    gs2, g0a2, clipped = sim.invert_apparatus(0.5, 0.0)
    assert clipped
    assert gs2 == 0.0 and g0a2 == pytest.approx(0.5)


def test_apparatus_counts_multinomial():
    v = np.array([1.0, 1.0, 1.0, 1.0]) / 2.0
    counts = sim.two_spin_apparatus_counts(v, 10000, np.random.default_rng(0))
    assert sum(counts.values()) == 10000
    p = sim.apparatus_probabilities(v)
    for d in sim.DETECTORS:
        sigma = math.sqrt(10000 * p[d] * (1 - p[d]))
        assert abs(counts[d] - 10000 * p[d]) <= 4 * sigma + 1
