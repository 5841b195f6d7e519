"""Minimal-perturbation solvers for rectangular multiparameter eigenvalue problems.

The package solves systems of k coupled equations
A_i x_i = sum_s lambda_s B_is x_i with tall rectangular coefficient blocks,
which in general admit no exact solution: approximate eigen-tuples are
defined as exact ones of the nearest (Frobenius) perturbed problem.  Two
solvers are provided -- an alternating scheme for a single tuple and a
truncated-SVD reduction to a square multiparameter problem for the complete
set -- plus a Chebyshev least-squares front end that turns two-parameter ODE
eigenproblems into such systems, and a batch CLI for experiments.
"""

from .alternating import AlternatingConfig, AlternatingTrace, solve_one
from .config import DEFAULT, NumericsConfig
from .errors import (
    BackendError,
    CapacityError,
    DomainError,
    InfiniteEigenvalueError,
    IrregularMepError,
    RmepError,
    ValidationError,
)
from .mep import check_regularity, extract_factors, operator_determinants, solve_mep
from .model import (
    EigenTuple,
    EquationBlock,
    HomogeneousEigenvalue,
    MepProblem,
    PerturbationSet,
    RmepProblem,
    apply_perturbation,
    dehomogenize,
    homogeneous_residual,
    homogenize,
    normalized_residual,
    perturbation_cost,
    random_planted_problem,
)
from .spectral import (
    ChebyshevBasis,
    DiscretizedOde,
    OdeEquation,
    OdeSpec,
    build_basis,
    builtin_mathieu,
    builtin_sturm_liouville,
    continuous_residual,
    discretize,
    reconstruct,
)
from .tsvd import reduced_mep, solve_complete, truncate_blocks, truncation_certificate

__version__ = "0.1.0"

__all__ = [
    "AlternatingConfig",
    "AlternatingTrace",
    "BackendError",
    "CapacityError",
    "ChebyshevBasis",
    "DEFAULT",
    "DiscretizedOde",
    "DomainError",
    "EigenTuple",
    "EquationBlock",
    "HomogeneousEigenvalue",
    "InfiniteEigenvalueError",
    "IrregularMepError",
    "MepProblem",
    "NumericsConfig",
    "OdeEquation",
    "OdeSpec",
    "PerturbationSet",
    "RmepError",
    "RmepProblem",
    "ValidationError",
    "apply_perturbation",
    "build_basis",
    "builtin_mathieu",
    "builtin_sturm_liouville",
    "check_regularity",
    "continuous_residual",
    "dehomogenize",
    "discretize",
    "extract_factors",
    "homogeneous_residual",
    "homogenize",
    "normalized_residual",
    "operator_determinants",
    "perturbation_cost",
    "random_planted_problem",
    "reconstruct",
    "reduced_mep",
    "solve_complete",
    "solve_mep",
    "solve_one",
    "truncate_blocks",
    "truncation_certificate",
]
