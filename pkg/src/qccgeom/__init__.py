"""Curvature, quasi-constant curvature and Ricci soliton checks on explicit metrics.

Metrics, vector fields and tensors are given as expression strings over a
coordinate chart; every claim is verified numerically on sample points with
exact symbolic derivatives.
"""
__version__ = "0.1.0"

from .exprlang import ExprError, ExprSyntaxError, diff, evaluate, parse, render, simplify
from .tensor import (
    Chart, Geometry, MetricField, OneForm, SymTensor2Field, TensorField, VectorField,
    christoffel, covariant_derivative, lie_derivative_metric, ricci, riemann,
    scalar_curvature,
)
from .qcc import (
    QCCFit, ab_from_curvature, check_derived_identities, curvature_from_ab, fit_qcc,
    regularity, regularity_equivalences,
)
from .parallel import ParallelReport, verify_parallel_tensor
from .soliton import (
    SolitonReport, TorseFormingFit, best_lambda, best_lambda_mu, eta_soliton_report,
    geodesic_soliton_condition, kenmotsu_type_check, ricci_soliton_report,
    torse_forming_detect,
)
from . import zoo

__all__ = [
    "__version__", "ExprError", "ExprSyntaxError", "parse", "evaluate", "diff", "simplify", "render",
    "Chart", "Geometry", "MetricField", "TensorField", "VectorField", "OneForm", "SymTensor2Field",
    "christoffel", "riemann", "ricci", "scalar_curvature", "covariant_derivative",
    "lie_derivative_metric", "QCCFit", "fit_qcc", "ab_from_curvature", "curvature_from_ab",
    "check_derived_identities", "regularity", "regularity_equivalences", "ParallelReport",
    "verify_parallel_tensor", "SolitonReport", "TorseFormingFit", "best_lambda", "best_lambda_mu",
    "ricci_soliton_report", "eta_soliton_report", "geodesic_soliton_condition",
    "torse_forming_detect", "kenmotsu_type_check", "zoo",
]
