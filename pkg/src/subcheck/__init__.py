"""Numerical verification of semi-slant structure for Riemannian submersions."""

__version__ = "0.1.0"

from .autodiff import Jet
from .exprs import eval_jet2, eval_value, parse, unparse
from .geometry import (
    ComplexStructureField,
    ExprVectorField,
    MetricField,
    christoffel,
    covariant_derivative,
    lie_bracket,
    product_J,
    sectional_curvature,
    standard_J,
)
from .submersion import (
    MapAnalysis,
    SemiSlantAnalysis,
    SubmersionMap,
    Tolerances,
    analyze,
    analyze_map,
    even_dimension_check,
    riemannian_submersion_residual,
)

__all__ = [
    "Jet",
    "parse",
    "unparse",
    "eval_value",
    "eval_jet2",
    "MetricField",
    "ComplexStructureField",
    "ExprVectorField",
    "christoffel",
    "covariant_derivative",
    "lie_bracket",
    "sectional_curvature",
    "standard_J",
    "product_J",
    "SubmersionMap",
    "SemiSlantAnalysis",
    "MapAnalysis",
    "Tolerances",
    "analyze",
    "analyze_map",
    "even_dimension_check",
    "riemannian_submersion_residual",
]
