"""Curvature engine for (alpha,beta)-Finsler metrics.

Definitional curvature kernels driven by exact jet arithmetic, the closed
forms of the (alpha,beta) literature, an exact rational-function
certificate layer, Busemann-Hausdorff volume quadrature, and numeric
classifiers -- each closed form cross-validated against its definitional
counterpart.
"""

__version__ = "0.1.0"

from .errors import (
    ArgumentError,
    ConfigError,
    DegenerateFlagError,
    DomainError,
    EvaluationError,
    FinslerError,
    IntegrationError,
    ParseError,
    RegularityError,
)
from .metrics import (
    MetricSpec,
    PhiFamily,
    PointState,
    approx_matsumoto,
    euclidean_spec,
    matsumoto,
    point_state,
    polynomial,
    randers,
    riemannian,
    second_matsumoto,
    spec_from_strings,
)

__all__ = [
    "__version__",
    "ArgumentError",
    "ConfigError",
    "DegenerateFlagError",
    "DomainError",
    "EvaluationError",
    "FinslerError",
    "IntegrationError",
    "ParseError",
    "RegularityError",
    "MetricSpec",
    "PhiFamily",
    "PointState",
    "approx_matsumoto",
    "euclidean_spec",
    "matsumoto",
    "point_state",
    "polynomial",
    "randers",
    "riemannian",
    "second_matsumoto",
    "spec_from_strings",
]
