"""Reconstruction of bivariate entire functions from complex-line restrictions.

The package provides, in layers: an arbitrary-precision complex value type
with exact decimal I/O (precision), complex divided differences and their
algebraic identities (divdiff), truncated two-variable power series and their
restrictions to lines through the origin (funcmodel), the explicit
interpolant built from line data with its two remainder forms (interpolate),
growth diagnostics for divided differences of the conjugation kernel
(criterion), a unitary change of variables mapping unbounded node sets to
bounded ones (mobius), and an adversarial node construction defeating any
uniform growth bound (counterexample). A click CLI in lineinterp.cli fronts
the lot.
"""

from .errors import (
    ArityError,
    ConditioningWarning,
    ConfigError,
    ConstructionFailureError,
    DegenerateNodeError,
    DomainError,
    LineInterpError,
    NoGermError,
    NodeDistinctnessError,
    NumericError,
    ParseError,
    SeparationError,
    UnsuitableKernelError,
)
from .precision import (
    DEFAULT_PRECISION,
    MIN_PRECISION,
    ApComplex,
    Tolerance,
    approx_eq,
    make_complex,
    parse_decimal,
    render_decimal,
    ulp,
    ulps_apart,
)
from .divdiff import (
    DividedDiffTable,
    NodeSequence,
    ScalarFunction,
    analytic_series,
    conjugation,
    delta,
    delta_analytic,
    delta_table,
    lagrange_sum,
    leibniz_delta,
    monotone_tuple_count,
    newton_sum,
    product,
)
from .funcmodel import (
    LineRestriction,
    TaylorSeries2,
    eval2,
    exp_sum_series,
    expcos_series,
    poly_series,
    project_to_line,
    restrict_to_line,
    series_from_spec,
)
from .interpolate import (
    InterpolantReport,
    OrderSensitivityProbe,
    condition_estimate,
    default_zgrid,
    eval_EN,
    eval_RN_lagrange,
    eval_RN_newton,
    eval_tail,
    identity_report,
    interpolation_check,
    lagrange_monomial,
    order_sensitivity_probe,
)
from .criterion import (
    CriterionProfile,
    MixedProfile,
    NodeFamily,
    ProbeReport,
    circle_family,
    conj_kernel,
    criterion_profile,
    custom_family,
    explicit_family,
    generate_nodes,
    germ_for_family,
    line_family,
    mixed_delta,
    mixed_profile,
    strengthened_bound,
    uniform_delta_probe,
)
from .counterexample import (
    AdversarialSequence,
    EscalationPolicy,
    GrowthReport,
    GrowthRow,
    StageRecord,
    WirtingerPair,
    build_sequence,
    default_kernel,
    verify_growth,
    wirtinger_at_zero,
)
from .mobius import (
    MobiusContext,
    inverse_homography,
    line_factor_check,
    make_context,
    pushforward,
    suggest_eta_inf,
    theta_bound,
    theta_infinity,
    theta_of,
    to_bounded,
)

__all__ = [
    "ApComplex",
    "Tolerance",
    "NodeSequence",
    "ScalarFunction",
    "DividedDiffTable",
    "analytic_series",
    "conjugation",
    "product",
    "delta",
    "delta_table",
    "delta_analytic",
    "newton_sum",
    "lagrange_sum",
    "leibniz_delta",
    "monotone_tuple_count",
    "TaylorSeries2",
    "LineRestriction",
    "eval2",
    "restrict_to_line",
    "project_to_line",
    "series_from_spec",
    "poly_series",
    "exp_sum_series",
    "expcos_series",
    "InterpolantReport",
    "OrderSensitivityProbe",
    "eval_EN",
    "eval_RN_lagrange",
    "eval_RN_newton",
    "eval_tail",
    "identity_report",
    "interpolation_check",
    "lagrange_monomial",
    "condition_estimate",
    "order_sensitivity_probe",
    "default_zgrid",
    "CriterionProfile",
    "MixedProfile",
    "ProbeReport",
    "NodeFamily",
    "conj_kernel",
    "criterion_profile",
    "mixed_delta",
    "mixed_profile",
    "strengthened_bound",
    "uniform_delta_probe",
    "line_family",
    "circle_family",
    "explicit_family",
    "custom_family",
    "generate_nodes",
    "germ_for_family",
    "AdversarialSequence",
    "EscalationPolicy",
    "GrowthReport",
    "GrowthRow",
    "StageRecord",
    "WirtingerPair",
    "build_sequence",
    "default_kernel",
    "verify_growth",
    "wirtinger_at_zero",
    "MobiusContext",
    "make_context",
    "to_bounded",
    "theta_of",
    "theta_bound",
    "theta_infinity",
    "inverse_homography",
    "line_factor_check",
    "pushforward",
    "suggest_eta_inf",
    "approx_eq",
    "make_complex",
    "parse_decimal",
    "render_decimal",
    "ulp",
    "ulps_apart",
    "DEFAULT_PRECISION",
    "MIN_PRECISION",
    "LineInterpError",
    "ConfigError",
    "NumericError",
    "ParseError",
    "ArityError",
    "DomainError",
    "SeparationError",
    "NoGermError",
    "NodeDistinctnessError",
    "DegenerateNodeError",
    "UnsuitableKernelError",
    "ConstructionFailureError",
    "ConditioningWarning",
]
