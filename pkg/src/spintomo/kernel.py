"""Tomographic kernel functions.

The continuous SU(2) kernel enters the reconstruction as a per-sample
estimator matrix; the discrete schemes replace the direction integral by
finite sums over a three-axis (spin 1/2) or tetrahedral (spin 1) set of
measurement directions.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .spincore import (
    Direction,
    DensityMatrix,
    check_two_s,
    lambda_matrix,
    lambda_matrices,
    m_index,
    m_values,
    outcome_probabilities,
    spin_operators,
)


def kernel_scalar(two_s, x):
    """Scalar kernel (2s+1)/pi * integral of sin^2(psi/2) e^{i psi x} dpsi.

    Only integer x (differences of outcomes) occur; the integral then
    collapses to (2s+1) * (delta_{x,0} - delta_{|x|,1}/2).
    """
    two_s = check_two_s(two_s)
    xi = int(round(x))
    if abs(x - xi) > 1e-9:
        raise ValueError(f"kernel argument must be integer-valued, got {x}")
    if xi == 0:
        return float(two_s + 1)
    if abs(xi) == 1:
        return -float(two_s + 1) / 2
    return 0.0


def kernel_matrix(two_s, direction, m):
    """Matrix elements of K_s(m - s.n) in the sz basis.

    Entry (i, l) is (2s+1) * [lam[i,m] lam*[l,m]
    - (lam[i,m+1] lam*[l,m+1] + lam[i,m-1] lam*[l,m-1]) / 2],
    with out-of-range m +/- 1 columns taken as zero.
    """
    two_s = check_two_s(two_s)
    idx = m_index(two_s, m)
    lam = lambda_matrix(two_s, direction.theta, direction.phi)
    dim = two_s + 1
    out = np.outer(lam[:, idx], lam[:, idx].conj())
    for nb in (idx - 1, idx + 1):
        if 0 <= nb < dim:
            out -= 0.5 * np.outer(lam[:, nb], lam[:, nb].conj())
    return (two_s + 1) * out


def kernel_matrices(two_s, thetas, phis, m_indices):
    """Batch of kernel matrices, shape (N, dim, dim).

    ``m_indices`` are basis indices of the outcomes (0 = m of -s).
    """
    two_s = check_two_s(two_s)
    dim = two_s + 1
    lam = lambda_matrices(two_s, thetas, phis)
    m_indices = np.asarray(m_indices, dtype=int)
    n = lam.shape[0]
    rows = np.arange(n)
    cols = lam[rows, :, m_indices]              # (N, dim), column of each m
    out = cols[:, :, None] * cols.conj()[:, None, :]
    for shift in (-1, 1):
        nb = m_indices + shift
        ok = (nb >= 0) & (nb < dim)
        nb_cols = np.zeros_like(cols)
        nb_cols[ok] = lam[rows[ok], :, nb[ok]]
        out -= 0.5 * nb_cols[:, :, None] * nb_cols.conj()[:, None, :]
    return (two_s + 1) * out


def kernel_trace(two_s, m_indices):
    """Traces of the kernel matrices: (2s+1) (1 - c/2) with c the number
    of in-range neighbour outcomes."""
    two_s = check_two_s(two_s)
    m_indices = np.asarray(m_indices, dtype=int)
    c = ((m_indices - 1 >= 0).astype(float)
         + (m_indices + 1 <= two_s).astype(float))
    return (two_s + 1) * (1.0 - c / 2.0)


def kernel_sz_trace(two_s, m_indices, thetas):
    """Traces Tr[K sz], closed form: cos(theta) * sum over in-range m' of
    kernel_scalar(m - m') m'."""
    two_s = check_two_s(two_s)
    m_indices = np.asarray(m_indices, dtype=int)
    thetas = np.asarray(thetas, dtype=float)
    mvals = m_values(two_s)
    coeff = (two_s + 1) * mvals[m_indices]
    for shift in (-1, 1):
        nb = m_indices + shift
        ok = (nb >= 0) & (nb <= two_s)
        contrib = np.zeros_like(coeff)
        contrib[ok] = -(two_s + 1) / 2.0 * mvals[nb[ok]]
        coeff = coeff + contrib
    return np.cos(thetas) * coeff


def quadrature_reconstruct(rho, n_theta=64, n_phi=128):
    """Evaluate the reconstruction integral with exact probabilities on a
    Gauss-Legendre (cos theta) x uniform (phi) product grid.

    With exact p(n, m) this converges to rho as the grid is refined; it is
    the deterministic completeness check for the continuous scheme.
    """
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    two_s = mat.shape[0] - 1
    dim = two_s + 1
    x, w = np.polynomial.legendre.leggauss(n_theta)
    thetas = np.arccos(x)
    phis = 2 * math.pi * np.arange(n_phi) / n_phi

    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    ww = np.repeat(w, n_phi) / (2.0 * n_phi)   # weights of dn/(4 pi)
    tt = tt.ravel()
    pp = pp.ravel()

    lam = lambda_matrices(two_s, tt, pp)
    probs = np.einsum("nim,il,nlm->nm", lam.conj(), mat, lam).real

    est = np.zeros((dim, dim), dtype=complex)
    for idx in range(dim):
        weight = ww * probs[:, idx]
        cols = lam[:, :, idx]
        est += np.einsum("n,ni,nl->il", weight, cols, cols.conj())
        for nb in (idx - 1, idx + 1):
            if 0 <= nb < dim:
                nb_cols = lam[:, :, nb]
                est -= 0.5 * np.einsum("n,ni,nl->il", weight, nb_cols, nb_cols.conj())
    return dim * est


# ---------------------------------------------------------------------------
# discrete schemes

#: rotation axes of the 12-element tetrahedral group used for spin 1
TETRAHEDRAL_VERSORS = np.array([
    [1, 1, 1],
    [1, -1, -1],
    [-1, 1, -1],
    [-1, -1, 1],
    [math.sqrt(3), 0, 0],
    [0, math.sqrt(3), 0],
    [0, 0, math.sqrt(3)],
]) / math.sqrt(3)


def discrete_kernel_s1(j, x):
    """Per-direction scalar kernel of the tetrahedral spin-1 scheme:
    2 cos(2 pi x / 3) for the body-diagonal axes (j = 1..4) and
    e^{-i pi x} for the coordinate axes (j = 5..7)."""
    if j not in range(1, 8):
        raise ValueError(f"direction index must be in 1..7, got {j}")
    if j <= 4:
        return complex(2.0 * math.cos(2.0 * math.pi * x / 3.0))
    return cmath.exp(-1j * math.pi * x)


@dataclass(frozen=True)
class FiniteGroupScheme:
    """A finite measurement scheme: directions, per-direction weights and
    the per-record estimator matrices implementing the finite-group
    reconstruction sum."""

    name: str
    two_s: int
    directions: tuple
    weights: tuple

    @property
    def num_directions(self):
        return len(self.directions)

    def estimator_matrix(self, j, m):
        """Estimator contribution of one record taken along direction j
        (0-based) with outcome m, normalized so that the average over a
        direction-balanced record stream is unbiased for rho."""
        dim = self.two_s + 1
        if self.name == "pauli_half":
            ops = spin_operators(1)
            sigma = [2 * ops.sx, 2 * ops.sy, 2 * ops.sz][j]
            return 3.0 * m * sigma + np.eye(2, dtype=complex) / 2.0
        # tetrahedral_one: (1/4) sum_j p(j, m) Kj(m - s.nj) + I/4, with
        # the operator expanded in the s.nj eigenbasis
        n = self.directions[j]
        lam = lambda_matrix(self.two_s, n.theta, n.phi)
        mvals = m_values(self.two_s)
        op = np.zeros((dim, dim), dtype=complex)
        for k, mprime in enumerate(mvals):
            op += (discrete_kernel_s1(j + 1, m - mprime)
                   * np.outer(lam[:, k], lam[:, k].conj()))
        return (self.num_directions / 4.0) * op + np.eye(dim, dtype=complex) / 4.0

    def exact_probabilities(self, rho):
        """Outcome probability table p[j, m] for every scheme direction."""
        return np.array([outcome_probabilities(rho, n) for n in self.directions])

    def reconstruct_exact(self, probabilities):
        """Reconstruction from an exact probability table; algebraically
        the finite-group inversion formula, exact for valid tables."""
        probabilities = np.asarray(probabilities, dtype=float)
        dim = self.two_s + 1
        expected = (self.num_directions, dim)
        if probabilities.shape != expected:
            raise ValueError(
                f"probability table must have shape {expected}, got {probabilities.shape}")
        est = np.zeros((dim, dim), dtype=complex)
        mvals = m_values(self.two_s)
        for j in range(self.num_directions):
            for k, m in enumerate(mvals):
                est += (probabilities[j, k] / self.num_directions
                        * self.estimator_matrix(j, m))
        return est


_PAULI_DIRECTIONS = (
    Direction(math.pi / 2, 0.0),            # x
    Direction(math.pi / 2, math.pi / 2),    # y
    Direction(0.0, 0.0),                    # z
)


def finite_scheme(name):
    """Look up a finite measurement scheme by name."""
    if name == "pauli_half":
        return FiniteGroupScheme(name=name, two_s=1,
                                 directions=_PAULI_DIRECTIONS,
                                 weights=(1.0, 1.0, 1.0))
    if name == "tetrahedral_one":
        dirs = tuple(Direction.from_vector(v) for v in TETRAHEDRAL_VERSORS)
        return FiniteGroupScheme(name=name, two_s=2,
                                 directions=dirs,
                                 weights=(0.25,) * 7)
    raise ValueError(f"unknown finite scheme {name!r}")
