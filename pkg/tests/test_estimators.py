import numpy as np
import pytest
from sklearn.base import clone

import spintomo.simulate as sim
import spintomo.spincore as sc
from spintomo.estimators import (
    ContinuousTomography,
    CoupledTomography,
    MultiParticleTomography,
    PauliTomography,
    TetrahedralTomography,
)


def _records(two_s=2, n=4000, seed=0, scheme="continuous"):
    rho = sc.DensityMatrix.from_pure(sc.coherent_state(two_s, 1.0))
    return sim.run_experiment(sim.ExperimentConfig(rho, n, seed=seed,
                                                   scheme=scheme)), rho


def test_get_set_params_and_clone():
    est = ContinuousTomography(num_blocks=20)
    assert est.get_params() == {"num_blocks": 20}
    est.set_params(num_blocks=5)
    assert est.num_blocks == 5
    twin = clone(est)
    assert twin.get_params() == {"num_blocks": 5}


def test_fit_exposes_attributes():
    rec, rho = _records()
    est = ContinuousTomography().fit(rec)
    assert est.matrix_.shape == (3, 3)
    assert est.std_error_.shape == (3, 3)
    assert len(est.basis_labels_) == 3
    assert np.max(np.abs(est.matrix_ - rho.matrix)) < 0.2


def test_unfitted_access_raises():
    est = ContinuousTomography()
    with pytest.raises(RuntimeError):
        est.density_matrix()


def test_fit_type_checking():
    with pytest.raises(TypeError):
        ContinuousTomography().fit("not records")


def test_expectation_and_predict():
    rec, rho = _records(n=20000, seed=3)
    est = ContinuousTomography().fit(rec)
    ops = sc.spin_operators(2)
    val, err = est.expectation(ops.sz)
    truth = np.trace(rho.matrix @ ops.sz).real
    assert abs(val - truth) <= 4 * err
    preds = est.predict([ops.sx, ops.sy, ops.sz])
    assert preds.shape == (3,)
    assert preds[2] == pytest.approx(val)


def test_density_matrix_is_physical():
    rec, _ = _records(n=2000, seed=1)
    dm = ContinuousTomography().fit(rec).density_matrix()
    assert dm.is_positive()


def test_pauli_estimator():
    rec, rho = _records(two_s=1, n=9000, seed=2, scheme="pauli_half")
    est = PauliTomography().fit(rec)
    assert np.max(np.abs(est.matrix_ - rho.matrix)) < 0.1


def test_tetrahedral_estimator():
    rec, rho = _records(two_s=2, n=14000, seed=2, scheme="tetrahedral_one")
    est = TetrahedralTomography().fit(rec)
    assert np.max(np.abs(est.matrix_ - rho.matrix)) < 0.1


def test_multi_particle_estimator():
    rng = np.random.default_rng(4)
    states = [sc.DensityMatrix.random(2, rng) for _ in range(2)]
    rec = sim.run_product_experiment(states, 20000, seed=4)
    est = MultiParticleTomography().fit(rec)
    truth = np.kron(states[0].matrix, states[1].matrix)
    assert np.max(np.abs(np.diag(est.matrix_).real - np.diag(truth).real)) < 0.1


def test_coupled_estimator():
    rho = sc.symmetrize(sc.DensityMatrix.random(4, np.random.default_rng(5)), 2)
    rec = sim.run_coupled_experiment(rho, 20000, seed=5, num_spins=2)
    est = CoupledTomography().fit(rec)
    truth = sc.coupled_basis(2).to_coupled(rho)
    assert np.max(np.abs(np.diag(est.matrix_).real - np.diag(truth).real)) < 0.1
