"""Coupled randomness, mutual dimension and Billingsley mutual dimension at desk scale."""

__version__ = "0.1.0"

from mutualdim.errors import (
    CapacityError,
    DimensionError,
    InsufficientDataError,
    NoSolutionError,
    NotNormalizableError,
    RangeError,
    SingularMeasureError,
    UnclassifiableError,
    UnsupportedAlphabetError,
)
from mutualdim.measures import (
    JointPmf,
    MeasureSeq,
    Pmf,
    RhoSchedule,
    cylinder_prob,
    limit,
    marginals,
    product,
    rho_joint,
    uniform,
)

__all__ = [
    "CapacityError",
    "DimensionError",
    "InsufficientDataError",
    "NoSolutionError",
    "NotNormalizableError",
    "RangeError",
    "SingularMeasureError",
    "UnclassifiableError",
    "UnsupportedAlphabetError",
    "JointPmf",
    "MeasureSeq",
    "Pmf",
    "RhoSchedule",
    "cylinder_prob",
    "limit",
    "marginals",
    "product",
    "rho_joint",
    "uniform",
]
