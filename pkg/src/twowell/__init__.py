"""Two-well incompressible energies in the plane.

Geometry of the wells ``K = SO(2) U SO(2) H`` and their hulls, discrete
convex envelopes, laminate deformations with affine boundary values and a
penalised incompressible minimiser with affineness certificates.
"""

from .energy import EnergyModel, convexity_probes, dirichlet, two_well
from .envelope import GridEnvelope, build_biconjugate
from .errors import (
    ConfigError,
    DecompositionError,
    DomainError,
    NotInHullError,
    NumericError,
    TwoWellError,
)
from .field import DeformationField, affine_field, identity_field, perturbed_field
from .kernels import BACKEND
from .laminate import build_laminate_field, field_energy, field_gradient_stats
from .minimizer import (
    MinimizeProblem,
    SolveReport,
    affine_certificate,
    assemble_energy_and_grad,
    minimize,
    null_lagrangian_residual,
)
from .wellsgeo import (
    TwoWellParams,
    laminate_decompose,
    membership,
    neighbors_in_K,
    rank_one_angles,
    so3_rank_one_scan,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError",
    "DecompositionError",
    "DeformationField",
    "DomainError",
    "EnergyModel",
    "GridEnvelope",
    "MinimizeProblem",
    "NotInHullError",
    "NumericError",
    "SolveReport",
    "TwoWellError",
    "TwoWellParams",
    "affine_certificate",
    "affine_field",
    "assemble_energy_and_grad",
    "build_biconjugate",
    "build_laminate_field",
    "convexity_probes",
    "dirichlet",
    "field_energy",
    "field_gradient_stats",
    "identity_field",
    "laminate_decompose",
    "membership",
    "minimize",
    "neighbors_in_K",
    "null_lagrangian_residual",
    "perturbed_field",
    "rank_one_angles",
    "so3_rank_one_scan",
    "two_well",
]
