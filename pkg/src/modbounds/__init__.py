"""Bounds, sensitivity analysis, and Bayesian estimation for
treatment-moderator interactions when the moderator may be measured
before or after treatment."""

__version__ = "0.1.0"

from .bounds_closed import (
    BoundInterval,
    Q0Known,
    Q0Optimized,
    attention_bounds,
    monotonicity_bounds,
    monotonicity_bounds_negative,
    randomization_bounds_cate,
    randomization_bounds_delta,
    stability_bounds,
)
from .data_model import (
    AssumptionSet,
    CellProbabilities,
    CellTable,
    ColumnSchema,
    Design,
    Monotonicity,
    ObservationRecord,
    StrataDistribution,
    ingest_csv,
    tabulate,
)
from .estimation import (
    NaiveEstimates,
    bias_decomposition,
    cell_probabilities,
    naive_estimates,
)
from .inference import (
    ImCi,
    bootstrap_endpoints,
    im_ci_from_bootstrap,
    imbens_manski_ci,
)
from .lp_core import (
    CATE0,
    CATE1,
    DELTA,
    LinearProgram,
    LpStatus,
    Sense,
    StrataLpSpec,
    build_placement_lp,
    build_post_test_lp,
    simplex_solve,
    strata_bounds,
)
from .sensitivity import (
    SensitivityCurve,
    SensitivityRegion,
    default_gamma_grid,
    gamma_curve,
    gamma_theta_region,
)

__all__ = [
    "AssumptionSet",
    "BoundInterval",
    "CATE0",
    "CATE1",
    "CellProbabilities",
    "CellTable",
    "ColumnSchema",
    "DELTA",
    "Design",
    "ImCi",
    "LinearProgram",
    "LpStatus",
    "Monotonicity",
    "NaiveEstimates",
    "ObservationRecord",
    "Q0Known",
    "Q0Optimized",
    "Sense",
    "SensitivityCurve",
    "SensitivityRegion",
    "StrataDistribution",
    "StrataLpSpec",
    "attention_bounds",
    "bias_decomposition",
    "bootstrap_endpoints",
    "build_placement_lp",
    "build_post_test_lp",
    "cell_probabilities",
    "default_gamma_grid",
    "gamma_curve",
    "gamma_theta_region",
    "im_ci_from_bootstrap",
    "imbens_manski_ci",
    "ingest_csv",
    "monotonicity_bounds",
    "monotonicity_bounds_negative",
    "naive_estimates",
    "randomization_bounds_cate",
    "randomization_bounds_delta",
    "simplex_solve",
    "stability_bounds",
    "strata_bounds",
    "tabulate",
]
