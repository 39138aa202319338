"""Estimator-style front end for the reconstruction routines.

Each class follows the fit/attributes convention (``fit`` consumes a
record stream and exposes ``matrix_`` and ``std_error_``), so the
tomography plugs into pipelines and parameter searches that expect the
scikit-learn estimator protocol.
"""

import numpy as np
from sklearn.base import BaseEstimator

from . import reconstruct as rc
from .simulate import CoupledRecords, MultiRecords, SingleRecords


class _TomographyBase(BaseEstimator):
    """Shared post-fit surface of all tomography estimators."""

    def _finish(self, estimate):
        self.estimate_ = estimate
        self.matrix_ = estimate.matrix
        self.std_error_ = estimate.std_error
        self.basis_labels_ = estimate.basis_labels
        return self

    def _check_fitted(self):
        if not hasattr(self, "estimate_"):
            raise RuntimeError("estimator has not been fitted")

    def expectation(self, observable):
        """Expectation value of a Hermitian observable with its block
        standard error."""
        self._check_fitted()
        return rc.expectation_estimate(self.estimate_, observable)

    def predict(self, observables):
        """Expectation values for a sequence of Hermitian observables."""
        self._check_fitted()
        return np.array([self.expectation(obs)[0] for obs in observables])

    def density_matrix(self):
        """Physical (PSD-projected) density matrix of the fit."""
        self._check_fitted()
        return self.estimate_.projected_density_matrix()


class ContinuousTomography(_TomographyBase):
    """Monte Carlo linear inversion for a single spin measured along
    uniformly random axes."""

    def __init__(self, num_blocks=10):
        self.num_blocks = num_blocks

    def fit(self, records, y=None):
        if not isinstance(records, SingleRecords):
            raise TypeError("fit expects SingleRecords")
        return self._finish(rc.mc_reconstruct_single(records, self.num_blocks))


class PauliTomography(_TomographyBase):
    """Three-axis inversion for spin 1/2."""

    def __init__(self, num_blocks=10):
        self.num_blocks = num_blocks

    def fit(self, records, y=None):
        return self._finish(rc.discrete_reconstruct_half(records, self.num_blocks))


class TetrahedralTomography(_TomographyBase):
    """Tetrahedral-scheme inversion for spin 1."""

    def __init__(self, num_blocks=10):
        self.num_blocks = num_blocks

    def fit(self, records, y=None):
        return self._finish(rc.discrete_reconstruct_one(records, self.num_blocks))


class MultiParticleTomography(_TomographyBase):
    """Tensor-kernel inversion for distinguishable spins."""

    def __init__(self, num_blocks=10):
        self.num_blocks = num_blocks

    def fit(self, records, y=None):
        if not isinstance(records, MultiRecords):
            raise TypeError("fit expects MultiRecords")
        return self._finish(rc.multiparticle_reconstruct(records, self.num_blocks))


class CoupledTomography(_TomographyBase):
    """Block-wise inversion for indistinguishable spin-1/2 systems from
    joint (S, M) records."""

    def __init__(self, num_blocks=10):
        self.num_blocks = num_blocks

    def fit(self, records, y=None):
        if not isinstance(records, CoupledRecords):
            raise TypeError("fit expects CoupledRecords")
        return self._finish(
            rc.indistinguishable_reconstruct(records, self.num_blocks))
