"""Exact intersection theory and valuative dynamics for normal surface
singularities: dual graphs, skewness/angular metrics, germ actions on the
skeleton, attraction-rate recursions and cusp arithmetic."""

from .arith import QuadElem, Rat, parse_quad
from .resolution import (
    Classification,
    DiscrepancyTable,
    DualGraph,
    Prime,
    blowup_free,
    blowup_satellite,
    canonical_coeffs,
    check_negative_definite,
    classify_singularity,
    dual_basis,
    essential_skeleton,
    intersection_matrix,
)
from .valuation import (
    QMValuation,
    angular_distance,
    b_intersection,
    edge_metric,
    leq,
    log_discrepancy,
    rel_skewness,
    skewness,
)
from .dynamics import (
    QuadraticInteger,
    Ray,
    Sector,
    SkeletonMap,
    apply,
    check_nonexpansion,
    detect_recursion,
    dynamical_degree,
    find_fixed_set,
    orbit,
    stability_report,
)
from .transport import (
    ContractedCurve,
    GermResolutionTable,
    PrimeMap,
    RfFunctional,
    attraction_rate_from_table,
    curve_hat_divisor,
    jacobian_check,
    pullback_dual,
    pushforward_dual,
)
from .cusp import (
    CuspData,
    cf_to_quadratic,
    cusp_dual_graph,
    induced_skeleton_map,
    irrational_example,
    rotation_number,
    validate_alpha,
    vertex_sequence,
)

__all__ = [
    "QuadElem",
    "Rat",
    "parse_quad",
    "Classification",
    "DiscrepancyTable",
    "DualGraph",
    "Prime",
    "blowup_free",
    "blowup_satellite",
    "canonical_coeffs",
    "check_negative_definite",
    "classify_singularity",
    "dual_basis",
    "essential_skeleton",
    "intersection_matrix",
    "QMValuation",
    "angular_distance",
    "b_intersection",
    "edge_metric",
    "leq",
    "log_discrepancy",
    "rel_skewness",
    "skewness",
    "QuadraticInteger",
    "Ray",
    "Sector",
    "SkeletonMap",
    "apply",
    "check_nonexpansion",
    "detect_recursion",
    "dynamical_degree",
    "find_fixed_set",
    "orbit",
    "stability_report",
    "ContractedCurve",
    "GermResolutionTable",
    "PrimeMap",
    "RfFunctional",
    "attraction_rate_from_table",
    "curve_hat_divisor",
    "jacobian_check",
    "pullback_dual",
    "pushforward_dual",
    "CuspData",
    "cf_to_quadratic",
    "cusp_dual_graph",
    "induced_skeleton_map",
    "irrational_example",
    "rotation_number",
    "validate_alpha",
    "vertex_sequence",
]
