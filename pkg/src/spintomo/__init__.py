"""Spin-state tomography from modified Stern-Gerlach measurements.

The package simulates projective spin measurements along arbitrary (or
finitely many) axes, reconstructs the density matrix by linear
inversion with group-theoretic kernels, and verifies the underlying
averaging identities exactly on finite groups.
"""

__version__ = "1.0.0"

from .kernel import (
    finite_scheme,
    kernel_matrix,
    kernel_scalar,
    quadrature_reconstruct,
)
from .reconstruct import (
    ReconstructionEstimate,
    discrete_reconstruct_half,
    discrete_reconstruct_one,
    indistinguishable_reconstruct,
    mc_reconstruct_single,
    multiparticle_reconstruct,
)
from .simulate import (
    ApparatusParams,
    ExperimentConfig,
    plan_field,
    run_coupled_experiment,
    run_experiment,
    run_product_experiment,
)
from .spincore import (
    DensityMatrix,
    Direction,
    coherent_state,
    coupled_basis,
    eigenstate,
    lambda_matrix,
    spin_operators,
    thermal_state,
)

__all__ = [
    "__version__",
    "ApparatusParams",
    "DensityMatrix",
    "Direction",
    "ExperimentConfig",
    "ReconstructionEstimate",
    "coherent_state",
    "coupled_basis",
    "discrete_reconstruct_half",
    "discrete_reconstruct_one",
    "eigenstate",
    "finite_scheme",
    "indistinguishable_reconstruct",
    "kernel_matrix",
    "kernel_scalar",
    "lambda_matrix",
    "mc_reconstruct_single",
    "multiparticle_reconstruct",
    "plan_field",
    "quadrature_reconstruct",
    "run_coupled_experiment",
    "run_experiment",
    "run_product_experiment",
    "spin_operators",
    "thermal_state",
]
