"""Least sample size for a relative-error / confidence contract.

For n i.i.d. exponential observations the pivot 2 * sum(X) / mean is chi2(2n),
so the probability that the estimate lands within relative error epsilon is a
difference of two Poisson tails.  No prior knowledge of the parameter enters.

Criteria
--------
RATE_EXACT
    g(n, n/(1+eps)) - g(n, n/(1-eps)); exact coverage of n / sum(X).
SERVICE_CONSERVATIVE
    g(n, n(1+eps)/(1+2eps)) - g(n, n(1+eps)); a lower bound on the coverage
    of the sample mean (the default for service times).
SERVICE_EXACT
    g(n, n(1-eps)) - g(n, n(1+eps)); exact coverage of the sample mean.
    Opt-in extension, never larger than the conservative n.
"""

import enum
import math
from dataclasses import dataclass

from .specfn import poisson_tail

DEFAULT_MAX_N = 10**8


class NoSolutionWithinBudget(Exception):
    """No n <= max_n meets the requested coverage."""

    def __init__(self, precision, criterion, max_n, best_value):
        self.precision = precision
        self.criterion = criterion
        self.max_n = max_n
        self.best_value = best_value
        super().__init__(
            f"no n <= {max_n} reaches coverage {1 - precision.delta:.6g} for "
            f"epsilon={precision.epsilon:g}, delta={precision.delta:g} "
            f"({criterion.value}); coverage at max_n is {best_value:.6g}"
        )


class CriterionKind(enum.Enum):
    RATE_EXACT = "rate-exact"
    SERVICE_CONSERVATIVE = "service-conservative"
    SERVICE_EXACT = "service-exact"


@dataclass(frozen=True)
class PrecisionSpec:
    """Relative error bound ``epsilon`` held with probability ``1 - delta``."""

    epsilon: float
    delta: float

    def __post_init__(self):
        for name in ("epsilon", "delta"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError(f"{name} must be a real number, got {value!r}")
            if not (math.isfinite(value) and 0.0 < value < 1.0):
                raise ValueError(
                    f"{name} must lie in the open interval (0, 1), got {value}"
                )
            object.__setattr__(self, name, float(value))

    @property
    def confidence(self):
        return 1.0 - self.delta


@dataclass(frozen=True)
class SampleSizePlan:
    n: int
    criterion: CriterionKind
    coverage_lb_at_n: float
    precision: PrecisionSpec


def window(n, epsilon, criterion):
    """The (lower, upper) Poisson-mean arguments of the criterion at n."""
    if criterion is CriterionKind.RATE_EXACT:
        return n / (1.0 + epsilon), n / (1.0 - epsilon)
    if criterion is CriterionKind.SERVICE_CONSERVATIVE:
        return n * (1.0 + epsilon) / (1.0 + 2.0 * epsilon), n * (1.0 + epsilon)
    if criterion is CriterionKind.SERVICE_EXACT:
        return n * (1.0 - epsilon), n * (1.0 + epsilon)
    raise TypeError(f"unknown criterion {criterion!r}")


def coverage_value(n, precision, criterion):
    """Left-hand side of the criterion, clamped to [0, 1]."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    lo, hi = window(n, precision.epsilon, criterion)
    return min(1.0, max(0.0, poisson_tail(n, lo) - poisson_tail(n, hi)))


def solve_sample_size(precision, criterion, max_n=DEFAULT_MAX_N):
    """Least n <= max_n whose coverage value reaches 1 - delta.

    Doubles n until the criterion holds, bisects down to the boundary, then
    certifies that n - 1 fails.  If the certificate fails (coverage not
    monotone in n) it scans linearly down from the candidate until it finds
    the failing neighbour.
    """
    if isinstance(max_n, bool) or int(max_n) != max_n or max_n < 1:
        raise ValueError(f"max_n must be a positive integer, got {max_n!r}")
    max_n = int(max_n)
    target = precision.confidence

    def ok(n):
        return coverage_value(n, precision, criterion) >= target

    if ok(1):
        return _plan(1, precision, criterion)

    failing, passing = 1, None
    n = 1
    while passing is None:
        n = min(2 * n, max_n)
        if ok(n):
            passing = n
        elif n == max_n:
            raise NoSolutionWithinBudget(
                precision, criterion, max_n, coverage_value(max_n, precision, criterion)
            )
        else:
            failing = n

    while passing - failing > 1:
        mid = (failing + passing) // 2
        if ok(mid):
            passing = mid
        else:
            failing = mid

    n = passing
    while n > 1 and ok(n - 1):
        n -= 1
    return _plan(n, precision, criterion)


def _plan(n, precision, criterion):
    return SampleSizePlan(
        n=n,
        criterion=criterion,
        coverage_lb_at_n=coverage_value(n, precision, criterion),
        precision=precision,
    )


@dataclass(frozen=True)
class CurveRow:
    """One (epsilon, delta) cell of a sample-size curve.

    ``plan`` is None when the budget ``max_n`` was exceeded.
    """

    epsilon: float
    delta: float
    criterion: CriterionKind
    plan: SampleSizePlan | None
    max_n: int

    @property
    def n(self):
        return None if self.plan is None else self.plan.n

    @property
    def coverage_lb(self):
        return None if self.plan is None else self.plan.coverage_lb_at_n

    @property
    def budget_exceeded(self):
        return self.plan is None


def curve(epsilon_grid, delta_list, criterion, max_n=DEFAULT_MAX_N):
    """Solve every (epsilon, delta) cell; rows are ordered delta-major."""
    epsilon_grid = list(epsilon_grid)
    delta_list = list(delta_list)
    if not epsilon_grid or not delta_list:
        raise ValueError("epsilon_grid and delta_list must be non-empty")
    rows = []
    for delta in delta_list:
        for epsilon in epsilon_grid:
            precision = PrecisionSpec(epsilon, delta)
            try:
                plan = solve_sample_size(precision, criterion, max_n)
            except NoSolutionWithinBudget:
                plan = None
            rows.append(CurveRow(precision.epsilon, precision.delta, criterion, plan, max_n))
    return rows
