"""Piecewise-linear approximation of separable concave minimization."""
from . import oracle
from . import flp, mcf
from .approx import (ApproxSpec, GeneralDomainSpec, build_pwl_general, build_pwl_monotone,
                     build_pwl_secant, grid_points, tangent_at, tight_worst_case, verify_ratio)
from .exceptions import (DomainError, InfeasibleInstance, InvalidArgument, PreconditionViolation,
                         PwlOptError, SizeCapExceeded, UndefinedGap)
from .estimator import ConcaveFacilityLocation, ConcaveFlowSolver, PiecewiseConcaveApproximator
from .fixed_charge import FixedChargeModel, compose_guarantee, emit_model, to_fixed_charge
from .lower_bound import gamma, lower_bound_pieces, tangent_cover_sqrt, tangentify
from .oracle import ConcaveOracle
from .polyhedra import Polyhedron, bound_U, bound_V, pieces_bound
from .pwl import LinearPiece, PwlFunction

__version__ = "0.1.0"

__all__ = [
    "ApproxSpec", "ConcaveFacilityLocation", "ConcaveFlowSolver", "ConcaveOracle",
    "FixedChargeModel", "PiecewiseConcaveApproximator", "Polyhedron", "bound_U", "bound_V",
    "compose_guarantee", "emit_model", "flp", "mcf", "pieces_bound", "to_fixed_charge", "DomainError", "GeneralDomainSpec", "InfeasibleInstance",
    "InvalidArgument", "LinearPiece", "PreconditionViolation", "PwlFunction", "PwlOptError",
    "SizeCapExceeded", "UndefinedGap", "build_pwl_general", "build_pwl_monotone",
    "build_pwl_secant", "gamma", "grid_points", "lower_bound_pieces", "oracle", "tangent_at",
    "tangent_cover_sqrt", "tangentify", "tight_worst_case", "verify_ratio",
]
