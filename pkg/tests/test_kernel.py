import math

import numpy as np
import pytest

import spintomo.kernel as kn
import spintomo.spincore as sc


def test_kernel_scalar_values():
    # (2s+1) at x=0, -(2s+1)/2 at |x|=1, 0 beyond
    for two_s in (1, 2, 5):
        dim = two_s + 1
        assert kn.kernel_scalar(two_s, 0) == pytest.approx(dim)
        assert kn.kernel_scalar(two_s, 1) == pytest.approx(-dim / 2)
        assert kn.kernel_scalar(two_s, -1) == pytest.approx(-dim / 2)
        for x in (2, -2, 3, 7):
            assert kn.kernel_scalar(two_s, x) == 0.0


def test_kernel_scalar_rejects_non_integer():
    with pytest.raises(ValueError):
        kn.kernel_scalar(2, 0.5)


def test_kernel_matrix_hermitian():
    two_s = 4
    d = sc.Direction(1.1, 0.7)
    for m in sc.m_values(two_s):
        k = kn.kernel_matrix(two_s, d, m)
        assert np.max(np.abs(k - k.conj().T)) <= 1e-12


def test_kernel_trace_closed_forms():
    two_s = 4
    rng = np.random.default_rng(0)
    thetas = rng.uniform(0, math.pi, 50)
    phis = rng.uniform(0, 2 * math.pi, 50)
    m_idx = rng.integers(0, two_s + 1, 50)
    ops = sc.spin_operators(two_s)
    kmats = kn.kernel_matrices(two_s, thetas, phis, m_idx)
    tr = kn.kernel_trace(two_s, m_idx)
    tr_sz = kn.kernel_sz_trace(two_s, m_idx, thetas)
    for i in range(50):
        assert np.trace(kmats[i]).real == pytest.approx(tr[i], abs=1e-10)
        assert np.trace(kmats[i] @ ops.sz).real == pytest.approx(tr_sz[i], abs=1e-10)


def test_kernel_matrices_match_single():
    two_s = 3
    thetas = np.array([0.4, 2.0])
    phis = np.array([1.0, 5.0])
    m_idx = np.array([0, 3])
    batch = kn.kernel_matrices(two_s, thetas, phis, m_idx)
    mvals = sc.m_values(two_s)
    for i in range(2):
        single = kn.kernel_matrix(two_s, sc.Direction(thetas[i], phis[i]),
                                  mvals[m_idx[i]])
        assert np.max(np.abs(batch[i] - single)) <= 1e-12


@pytest.mark.parametrize("two_s", [1, 2, 3, 4])
def test_quadrature_reconstructs_random_states(two_s):
    rng = np.random.default_rng(two_s)
    for _ in range(3):
        rho = sc.DensityMatrix.random(two_s + 1, rng)
        est = kn.quadrature_reconstruct(rho)
        assert np.max(np.abs(est - rho.matrix)) <= 1e-10


def test_tetrahedral_versors_unit():
    norms = np.linalg.norm(kn.TETRAHEDRAL_VERSORS, axis=1)
    assert np.allclose(norms, 1.0, atol=1e-15)
    assert kn.TETRAHEDRAL_VERSORS.shape == (7, 3)


def test_discrete_kernel_s1_values():
    # body diagonals: 2 cos(2 pi x / 3); coordinate axes: (-1)^x
    assert kn.discrete_kernel_s1(1, 0) == pytest.approx(2.0)
    assert kn.discrete_kernel_s1(2, 1) == pytest.approx(-1.0)
    assert kn.discrete_kernel_s1(5, 1) == pytest.approx(-1.0)
    assert kn.discrete_kernel_s1(7, 2) == pytest.approx(1.0)


@pytest.mark.parametrize("name,two_s", [("pauli_half", 1), ("tetrahedral_one", 2)])
def test_exact_probability_inversion(name, two_s):
    scheme = kn.finite_scheme(name)
    rng = np.random.default_rng(7)
    for _ in range(10):
        rho = sc.DensityMatrix.random(two_s + 1, rng)
        est = scheme.reconstruct_exact(scheme.exact_probabilities(rho))
        assert np.max(np.abs(est - rho.matrix)) <= 1e-12


def test_finite_scheme_unknown_name():
    with pytest.raises(ValueError):
        kn.finite_scheme("cubic")


def test_estimator_unbiased_on_uniform_table():
    # feeding the maximally mixed state's exact table returns I/dim
    for name, two_s in (("pauli_half", 1), ("tetrahedral_one", 2)):
        scheme = kn.finite_scheme(name)
        dim = two_s + 1
        rho = sc.DensityMatrix(np.eye(dim, dtype=complex) / dim)
        est = scheme.reconstruct_exact(scheme.exact_probabilities(rho))
        assert np.max(np.abs(est - np.eye(dim) / dim)) <= 1e-12
