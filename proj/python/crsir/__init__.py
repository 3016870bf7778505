"""Cluster-based regularized sliced inverse regression."""

from ._core import (
    ClusterAssignment,
    CrsirError,
    CrsirModel,
    DimensionMismatch,
    DomainError,
    EdrBasis,
    LengthMismatch,
    ar4_forecast,
    cluster_variables,
    correlation,
    crsir_fit,
    dfm5_forecast,
    evaluate_panel,
    regularize_covariance,
    simulate_design,
    sir_fit,
    standardize,
)

__all__ = [
    "ClusterAssignment",
    "CrsirError",
    "CrsirModel",
    "DimensionMismatch",
    "DomainError",
    "EdrBasis",
    "LengthMismatch",
    "ar4_forecast",
    "cluster_variables",
    "correlation",
    "crsir_fit",
    "dfm5_forecast",
    "evaluate_panel",
    "regularize_covariance",
    "simulate_design",
    "sir_fit",
    "standardize",
]
