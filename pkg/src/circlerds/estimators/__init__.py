"""Estimators for the random attracting point, stationary measures,
Lyapunov exponents, entropy and dimension."""
from .dimension import (DimensionResult, DimensionRunConfig, dimension_identity_residual,
                        local_dimension, radius_schedule)
from .entropy import auto_radius, furstenberg_entropy, preimage_arc, telescoping_residual
from .exponents import (arc_dichotomy, extremal_exponents_kingman, exponents_integral,
                        pointwise_exponent, pointwise_exponents, sync_rate)
from .measure import ArgmaxSet, EmpiricalMeasure, EstimateReport, ExponentPair, PointEstimate
from .points import (equivariance_residuals, estimate_pi, estimate_theta, estimate_theta_argmax,
                     pi_attraction_rate, reversed_argmax, sample_stationary)

__all__ = [
    "ArgmaxSet", "DimensionResult", "DimensionRunConfig", "EmpiricalMeasure", "EstimateReport",
    "ExponentPair", "PointEstimate", "arc_dichotomy", "auto_radius", "dimension_identity_residual",
    "equivariance_residuals", "estimate_pi", "estimate_theta", "estimate_theta_argmax",
    "exponents_integral", "extremal_exponents_kingman", "furstenberg_entropy", "local_dimension",
    "pi_attraction_rate", "pointwise_exponent", "pointwise_exponents", "preimage_arc",
    "radius_schedule", "reversed_argmax", "sample_stationary", "sync_rate",
    "telescoping_residual",
]
