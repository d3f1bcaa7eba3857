"""Sub-Riemannian geodesics on the jet space J^k of real functions of one variable."""

from .analysis import (
    BandDecomposition,
    BandEndpoint,
    BandInterval,
    EndpointKind,
    MotionClass,
    PeriodData,
    QuadratureError,
    action,
    classify,
    decompose_band,
    fit_curvature,
    period_shift,
)
from .core import (
    CanonicalMomenta,
    JetDim,
    JetPoint,
    Polynomial,
    ReducedMomenta,
    hamiltonian,
    power_functions,
)
from .dynamics import GeodesicArc, GeodesicState, IntegrationError, curvature_along, integrate
from .poisson import annihilation_defect, casimir_paper, casimirs, poisson_tensor, tensor_rank
from .synthesis import CurvatureSpec, FProfile, momenta_from_F, roundtrip_residual, synthesize

__version__ = "0.1.0"
