"""Sparseness-enforcing projections and Easy Dictionary Learning.

The package provides the linear-time, constant-space Euclidean projection
onto level sets of Hoyer's sparseness measure (with its gradient product),
a Hebbian dictionary learner built on that projection with topographic and
low-rank variants, image-patch tooling, projected-Landweber image
reproduction, and a benchmark harness for the projection solvers.
"""

from .errors import EzdlError
from .sparseness import SparsenessTarget, construct_member, hoyer_sigma, target_norms
from .projection import (
    SOLVERS,
    AuxEvaluation,
    ProjectionOutcome,
    alternating_project,
    aux_eval,
    grad_apply,
    oracle_project_sorted,
    project_nonneg,
    project_signed,
)

__all__ = [
    "EzdlError",
    "SparsenessTarget",
    "construct_member",
    "hoyer_sigma",
    "target_norms",
    "SOLVERS",
    "AuxEvaluation",
    "ProjectionOutcome",
    "alternating_project",
    "aux_eval",
    "grad_apply",
    "oracle_project_sorted",
    "project_nonneg",
    "project_signed",
]

__version__ = "0.1.0"
