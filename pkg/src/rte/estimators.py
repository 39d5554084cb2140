"""Point estimates of an arrival rate or a mean service time, with pivot CIs.

Both estimators rest on 2 * sum(X) * rate ~ chi2(2n) for n exponential
durations.  Sums use numpy's pairwise summation.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .planner import CriterionKind, PrecisionSpec, solve_sample_size
from .specfn import chi_square_quantile

DEFAULT_CI_LEVEL = 0.95


class EmptyBatch(ValueError):
    pass


class WrongKind(ValueError):
    pass


class ObservationKind(enum.Enum):
    INTERARRIVAL = "interarrival"
    SERVICE_TIME = "service"


@dataclass(frozen=True)
class ObservationBatch:
    """Positive durations in seconds, in observation order."""

    durations: tuple
    kind: ObservationKind
    source: str = ""

    def __post_init__(self):
        durations = tuple(float(d) for d in self.durations)
        if not durations:
            raise EmptyBatch("observation batch is empty")
        for i, d in enumerate(durations):
            if not (math.isfinite(d) and d > 0.0):
                raise ValueError(f"duration #{i} must be positive and finite, got {d}")
        object.__setattr__(self, "durations", durations)
        object.__setattr__(self, "kind", ObservationKind(self.kind))

    def __len__(self):
        return len(self.durations)

    def total(self):
        return total_duration(self.durations)


@dataclass(frozen=True)
class EstimateReport:
    point: float
    n_used: int
    ci_lower: float
    ci_upper: float
    ci_level: float
    precision: PrecisionSpec | None = None
    required_n: int | None = None
    stddev_estimate: float | None = None
    notes: tuple = field(default=())

    @property
    def guarantee_met(self):
        """True/False when a precision contract was attached, else None."""
        if self.required_n is None:
            return None
        return self.n_used >= self.required_n


def total_duration(durations):
    return float(np.sum(np.asarray(durations, dtype=np.float64)))


def _ci_level(precision, ci_level):
    if ci_level is None:
        ci_level = precision.confidence if precision is not None else DEFAULT_CI_LEVEL
    if not 0.0 < ci_level < 1.0:
        raise ValueError(f"ci_level must lie in (0, 1), got {ci_level}")
    return ci_level


def _pivot_bounds(n, ci_level):
    """chi2(2n) quantiles (lower, upper) cutting alpha/2 from each tail."""
    alpha = 1.0 - ci_level
    return chi_square_quantile(n, 1.0 - alpha / 2.0), chi_square_quantile(n, alpha / 2.0)


def _required_n(precision, criterion, max_n):
    if precision is None:
        return None
    return solve_sample_size(precision, criterion, max_n).n


def _check_kind(batch, kind):
    if batch.kind is not kind:
        raise WrongKind(f"expected a batch of {kind.value} durations, got {batch.kind.value}")


def estimate_rate(batch, precision=None, ci_level=None, max_n=10**8):
    """lambda_hat = n / sum(X) from interarrival times.

    The interval inverts 2 * lambda * sum(X) ~ chi2(2n).  When ``precision`` is
    given the report carries the planned n so callers can tell whether the
    relative-error guarantee applies.
    """
    _check_kind(batch, ObservationKind.INTERARRIVAL)
    n = len(batch)
    s = batch.total()
    level = _ci_level(precision, ci_level)
    q_lo, q_hi = _pivot_bounds(n, level)
    return EstimateReport(
        point=n / s,
        n_used=n,
        ci_lower=q_lo / (2.0 * s),
        ci_upper=q_hi / (2.0 * s),
        ci_level=level,
        precision=precision,
        required_n=_required_n(precision, CriterionKind.RATE_EXACT, max_n),
        notes=("confidence interval is a post-hoc chi-square pivot interval",),
    )


def estimate_service_mean(batch, precision=None, ci_level=None, max_n=10**8,
                          criterion=CriterionKind.SERVICE_CONSERVATIVE):
    """mu_hat = sum(X) / n from service times, plus the sample standard deviation.

    The standard deviation is a diagnostic only; it is itself random and says
    little about the accuracy of mu_hat.  It is None for n == 1.
    """
    _check_kind(batch, ObservationKind.SERVICE_TIME)
    n = len(batch)
    s = batch.total()
    mean = s / n
    stddev = None
    if n > 1:
        x = np.asarray(batch.durations)
        stddev = math.sqrt(float(np.sum((x - mean) ** 2)) / (n - 1))
    level = _ci_level(precision, ci_level)
    q_lo, q_hi = _pivot_bounds(n, level)
    return EstimateReport(
        point=mean,
        n_used=n,
        ci_lower=2.0 * s / q_hi,
        ci_upper=2.0 * s / q_lo,
        ci_level=level,
        precision=precision,
        required_n=_required_n(precision, criterion, max_n),
        stddev_estimate=stddev,
        notes=(
            "confidence interval is a post-hoc chi-square pivot interval",
            "stddev is a diagnostic, not an accuracy guarantee",
        ),
    )


def rate_from_count(count, window):
    """Conventional count / window rate; carries no error guarantee."""
    if isinstance(count, bool) or int(count) != count or count < 0:
        raise ValueError(f"count must be a non-negative integer, got {count!r}")
    window = float(window)
    if not (math.isfinite(window) and window > 0.0):
        raise ValueError(f"window must be positive, got {window}")
    return count / window
