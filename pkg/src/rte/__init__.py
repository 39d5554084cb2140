"""Sample-size planning and estimation of Poisson arrival rates and exponential
service times under a relative-error / confidence contract."""

__version__ = "0.1.0"

from .estimators import (  # noqa: E402
    EmptyBatch,
    EstimateReport,
    ObservationBatch,
    ObservationKind,
    WrongKind,
    estimate_rate,
    estimate_service_mean,
    rate_from_count,
)
from .mc import (  # noqa: E402
    CoverageReport,
    SimulationConfig,
    Target,
    run_coverage,
    sample_exponential,
    verify_event_algebra,
)
from .planner import (  # noqa: E402
    CriterionKind,
    NoSolutionWithinBudget,
    PrecisionSpec,
    SampleSizePlan,
    coverage_value,
    curve,
    solve_sample_size,
)
from .specfn import chi_square_quantile, chi_square_survival, poisson_tail  # noqa: E402
