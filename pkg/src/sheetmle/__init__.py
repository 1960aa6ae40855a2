"""Maximum-likelihood regression estimators for random fields driven by
Wiener or Ornstein-Uhlenbeck sheets observed on curved planar domains, plus
a Monte Carlo harness that validates the estimators against truncated-series
simulation."""

__version__ = "0.1.0"

from .errors import (
    CircleNotInPositiveQuadrant,
    DomainValidationError,
    EndpointMismatch,
    MonotonicityViolation,
    NonPositiveCoordinate,
    NonPositiveOrdinate,
    OutOfRectangle,
    SheetMLEError,
    SingularMatrix,
    StripOverlap,
    WrongModelVariant,
)
from .estimation import (
    EstimationResult,
    GriddedField,
    estimate,
    fisher_matrix,
    fisher_stationary_ou,
    fisher_wiener,
    fisher_zero_start_ou,
    mle,
    score_stationary_ou,
    score_vector,
    score_wiener,
    score_zero_start_ou,
)
from .geometry import (
    Curve,
    DomainSpec,
    ValidatedDomain,
    circle_domain,
    contains,
    domain_spec_from_json,
    domain_spec_to_json,
    transform_domain,
    validate,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    SweepEntry,
    compile_score_functional,
    emit_tables,
    run_experiment,
)
from .quadrature import QuadConfig, integrate_1d, integrate_over_G
from .random_fields import (
    Drift,
    FieldModel,
    FieldSample,
    KLSample,
    WIENER,
    counter_normal,
    derive_seed,
    draw_kl,
    dump_grid_csv,
    eval_d1,
    eval_d12,
    eval_d2,
    eval_field,
    eval_stationary_ou,
    eval_wiener,
    eval_zero_start_ou,
    series_factors,
    stationary_ou,
    transform_field,
    zero_start_ou,
)
from .regressors import (
    RegressorSet,
    from_callables,
    from_expressions,
    polynomial_example_basis,
    transform_regressors,
)
from .stochastic import (
    StochIntConfig,
    area_d1,
    area_d1d2,
    area_d2,
    area_plain,
    line_ds,
    line_dt,
)
