"""Density-matrix reconstruction from measurement records.

All estimators are linear inversions: each record contributes one
Hermitian estimator matrix and the estimate is their sample mean.  Error
bars come from partitioning the stream into contiguous statistical
blocks and taking the spread of the block means.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernel as kn
from . import spincore as sc
from .simulate import CoupledRecords, MultiRecords, SingleRecords


@dataclass(frozen=True)
class BlockStatistics:
    """Per-block means of a stream of contributions, plus the pooled
    mean and its standard error std(block means) / sqrt(num_blocks)."""

    block_means: np.ndarray   # (num_blocks, ...) complex
    mean: np.ndarray
    std_error: np.ndarray

    @property
    def num_blocks(self):
        return self.block_means.shape[0]


def block_statistics(contributions, num_blocks):
    """Contiguous-block statistics of per-sample contributions.

    ``contributions`` has the sample axis first; the number of samples
    must be divisible by ``num_blocks`` (>= 2).
    """
    contributions = np.asarray(contributions)
    n = contributions.shape[0]
    if num_blocks < 2:
        raise ValueError("num_blocks must be >= 2")
    if n == 0 or n % num_blocks:
        raise ValueError(
            f"{n} samples cannot be split into {num_blocks} equal blocks")
    shaped = contributions.reshape((num_blocks, n // num_blocks)
                                   + contributions.shape[1:])
    block_means = shaped.mean(axis=1)
    mean = block_means.mean(axis=0)
    std = np.sqrt((np.abs(block_means - mean) ** 2).sum(axis=0)
                  / (num_blocks - 1))
    return BlockStatistics(block_means=block_means, mean=mean,
                           std_error=std / math.sqrt(num_blocks))


@dataclass(frozen=True)
class ReconstructionEstimate:
    """A linear-inversion estimate with per-element statistical errors.

    ``matrix`` is Hermitian but not necessarily positive; ``std_error``
    holds the block standard error of each element's magnitude.
    """

    matrix: np.ndarray
    std_error: np.ndarray
    num_samples: int
    num_blocks: int
    scheme: str
    basis_labels: tuple
    block_means: np.ndarray = None

    @property
    def dim(self):
        return self.matrix.shape[0]

    def projected_density_matrix(self):
        """Optional projection onto the physical (PSD, unit-trace) cone:
        clip negative eigenvalues and renormalize."""
        evals, evecs = np.linalg.eigh(self.matrix)
        evals = np.clip(evals, 0.0, None)
        mat = (evecs * evals) @ evecs.conj().T
        return sc.DensityMatrix(mat / np.trace(mat).real, self.basis_labels)


def _estimate_from_contributions(contribs, num_blocks, scheme, basis_labels):
    stats = block_statistics(contribs, num_blocks)
    mean = (stats.mean + stats.mean.conj().T) / 2  # kill roundoff skew
    return ReconstructionEstimate(
        matrix=mean, std_error=stats.std_error,
        num_samples=contribs.shape[0], num_blocks=num_blocks,
        scheme=scheme, basis_labels=tuple(basis_labels),
        block_means=stats.block_means)


def mc_reconstruct_single(records, num_blocks=10):
    """Monte Carlo estimate of a single-spin density matrix from
    continuous-scheme records: the mean of the per-record kernels."""
    if not isinstance(records, SingleRecords):
        raise TypeError("mc_reconstruct_single expects SingleRecords")
    if len(records) == 0:
        raise ValueError("empty record set")
    contribs = kn.kernel_matrices(records.two_s, records.thetas,
                                  records.phis, records.m_indices)
    return _estimate_from_contributions(
        contribs, num_blocks, "continuous",
        tuple(sc.m_values(records.two_s)))


def _discrete_reconstruct(records, scheme_name, num_blocks):
    scheme = kn.finite_scheme(scheme_name)
    if records.two_s != scheme.two_s:
        raise ValueError(
            f"records have two_s={records.two_s}, scheme needs {scheme.two_s}")
    axes = np.array([d.theta for d in scheme.directions])
    dir_idx = np.argmin(
        np.abs(records.thetas[:, None] - axes[None, :])
        + np.abs((records.phis[:, None]
                  - np.array([d.phi for d in scheme.directions])[None, :] + math.pi)
                 % (2 * math.pi) - math.pi), axis=1)
    counts = np.bincount(dir_idx, minlength=scheme.num_directions)
    missing = np.where(counts == 0)[0]
    if missing.size:
        v = scheme.directions[missing[0]].unit_vector
        raise ValueError(
            f"no records for scheme direction {missing[0]} "
            f"(axis {np.round(v, 3).tolist()})")
    dim = scheme.two_s + 1
    mvals = sc.m_values(scheme.two_s)
    # cache the per-(direction, outcome) estimator matrices
    table = np.array([[scheme.estimator_matrix(j, m) for m in mvals]
                      for j in range(scheme.num_directions)])
    contribs = table[dir_idx, records.m_indices]
    return _estimate_from_contributions(contribs, num_blocks, scheme_name,
                                        tuple(mvals))


def discrete_reconstruct_half(records, num_blocks=10):
    """Three-axis (Pauli) reconstruction of a spin-1/2 state."""
    return _discrete_reconstruct(records, "pauli_half", num_blocks)


def discrete_reconstruct_one(records, num_blocks=10):
    """Tetrahedral-scheme reconstruction of a spin-1 state."""
    return _discrete_reconstruct(records, "tetrahedral_one", num_blocks)


def multiparticle_reconstruct(records, num_blocks=10):
    """Tensor-product kernel estimate for N distinguishable spins."""
    if not isinstance(records, MultiRecords):
        raise TypeError("multiparticle_reconstruct expects MultiRecords")
    n = len(records)
    if n == 0:
        raise ValueError("empty record set")
    per_particle = []
    for k, two_s in enumerate(records.two_s_list):
        idx = np.round(records.m[:, k] + two_s / 2.0).astype(int)
        per_particle.append(kn.kernel_matrices(
            two_s, records.thetas[:, k], records.phis[:, k], idx))
    contribs = per_particle[0]
    for mats in per_particle[1:]:
        contribs = np.einsum("nab,ncd->nacbd", contribs, mats).reshape(
            n, contribs.shape[1] * mats.shape[1], -1)
    labels = [(m,) for m in sc.m_values(records.two_s_list[0])]
    for two_s in records.two_s_list[1:]:
        labels = [lab + (m,) for lab in labels for m in sc.m_values(two_s)]
    return _estimate_from_contributions(contribs, num_blocks,
                                        "continuous-product", tuple(labels))


def indistinguishable_reconstruct(records, num_blocks=10):
    """Per-block kernel averaging for indistinguishable spin-1/2 systems.

    Each record contributes the spin-S kernel of its own S block (zero
    elsewhere); records with S below the maximum are split evenly over
    the identical symmetry copies so the total trace stays normalized.
    """
    if not isinstance(records, CoupledRecords):
        raise TypeError("indistinguishable_reconstruct expects CoupledRecords")
    basis = sc.coupled_basis(records.num_spins)
    dim = basis.dim
    n = len(records)
    if n == 0:
        raise ValueError("empty record set")
    contribs = np.zeros((n, dim, dim), dtype=complex)

    groups = {}
    for block in basis.blocks:
        groups.setdefault(block.two_S, []).append(block)
    for two_S, blocks in groups.items():
        sel = np.where(np.round(2 * records.total_S).astype(int) == two_S)[0]
        if sel.size == 0:
            import warnings
            warnings.warn(
                f"no records with S={two_S / 2}; that block is estimated as zero")
            continue
        share = 1.0 / len(blocks)
        if two_S == 0:
            for block in blocks:
                contribs[sel, block.start, block.start] = share
            continue
        idx = np.round(records.total_M[sel] + two_S / 2.0).astype(int)
        kmats = kn.kernel_matrices(two_S, records.thetas[sel],
                                   records.phis[sel], idx)
        for block in blocks:
            contribs[sel, block.start:block.stop, block.start:block.stop] = \
                share * kmats
    return _estimate_from_contributions(contribs, num_blocks,
                                        f"coupled-{records.num_spins}",
                                        basis.basis_labels)


def expectation_estimate(estimate, observable):
    """Tr[estimate . observable] with its block standard error."""
    observable = np.asarray(observable, dtype=complex)
    if observable.shape != estimate.matrix.shape:
        raise ValueError("observable dimension mismatch")
    if np.max(np.abs(observable - observable.conj().T)) > 1e-10:
        raise ValueError("observable must be Hermitian")
    value = float(np.trace(estimate.matrix @ observable).real)
    if estimate.block_means is None:
        raise ValueError("estimate carries no block means")
    per_block = np.einsum("bij,ji->b", estimate.block_means, observable).real
    err = per_block.std(ddof=1) / math.sqrt(estimate.num_blocks)
    return value, float(err)


# ---------------------------------------------------------------------------
# exact-probability (infinite statistics) reconstructions


def pauli_reconstruct_exact(rho):
    """Three-axis inversion evaluated with exact probabilities."""
    return kn.finite_scheme("pauli_half").reconstruct_exact(
        kn.finite_scheme("pauli_half").exact_probabilities(rho))


def tetrahedral_reconstruct_exact(rho):
    """Tetrahedral inversion evaluated with exact probabilities."""
    scheme = kn.finite_scheme("tetrahedral_one")
    return scheme.reconstruct_exact(scheme.exact_probabilities(rho))


# ---------------------------------------------------------------------------
# scalar fast paths for convergence / scaling studies


def sz_contributions_single(records):
    """Per-record estimates of <s_z> for continuous single-spin records,
    Tr[K(n, m) sz] in closed form."""
    return kn.kernel_sz_trace(records.two_s, records.m_indices, records.thetas)


def sz_contributions_discrete(records, scheme_name):
    """Per-record estimates of <s_z> under a finite scheme."""
    scheme = kn.finite_scheme(scheme_name)
    ops = sc.spin_operators(scheme.two_s)
    mvals = sc.m_values(scheme.two_s)
    table = np.array(
        [[np.trace(scheme.estimator_matrix(j, m) @ ops.sz).real for m in mvals]
         for j in range(scheme.num_directions)])
    dir_idx = np.arange(len(records)) % scheme.num_directions
    return table[dir_idx, records.m_indices]


def total_sz_contributions(records):
    """Per-record estimates of <S_z> for N distinguishable spins.

    Uses the factorized form Tr[(K_1 x ... x K_N) S_z]
    = sum_k Tr[K_k s_z] prod_{j != k} Tr[K_j], with the kernel traces in
    closed form; no tensor product is ever built.
    """
    n = len(records)
    num = records.num_particles
    traces = np.empty((n, num))
    sz_traces = np.empty((n, num))
    for k, two_s in enumerate(records.two_s_list):
        idx = np.round(records.m[:, k] + two_s / 2.0).astype(int)
        traces[:, k] = kn.kernel_trace(two_s, idx)
        sz_traces[:, k] = kn.kernel_sz_trace(two_s, idx, records.thetas[:, k])
    # leave-one-out products via prefix/suffix (robust to zero traces)
    prefix = np.ones((n, num + 1))
    suffix = np.ones((n, num + 1))
    for k in range(num):
        prefix[:, k + 1] = prefix[:, k] * traces[:, k]
        suffix[:, num - 1 - k] = suffix[:, num - k] * traces[:, num - 1 - k]
    loo = prefix[:, :num] * suffix[:, 1:]
    return (sz_traces * loo).sum(axis=1)
