"""Seeded Monte Carlo checks of the coverage guarantees.

Random numbers come from numpy's Philox4x64 counter-based generator.  Trial
``t`` of a run seeded with ``seed`` uses the 128-bit key ``seed + 2**64 * t``
with the counter starting at zero, so every trial is a pure function of
(seed, t) and any partition of trials across workers gives the same totals.
Exponential variates are -mean * log(U) with U = 1 - uniform in (0, 1].
"""

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

_KEY_MASK = (1 << 64) - 1


class Target(enum.Enum):
    RATE = "rate"
    SERVICE_MEAN = "service"


@dataclass(frozen=True)
class SimulationConfig:
    true_param: float
    n_per_trial: int
    trials: int
    seed: int
    target: Target

    def __post_init__(self):
        if not (math.isfinite(self.true_param) and self.true_param > 0):
            raise ValueError(f"true_param must be positive, got {self.true_param}")
        if self.n_per_trial < 1:
            raise ValueError(f"n_per_trial must be >= 1, got {self.n_per_trial}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed <= _KEY_MASK:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        object.__setattr__(self, "target", Target(self.target))

    @property
    def mean_duration(self):
        if self.target is Target.RATE:
            return 1.0 / self.true_param
        return self.true_param


@dataclass(frozen=True)
class CoverageReport:
    trials: int
    hits: int
    empirical_coverage: float
    std_error: float
    nominal_floor: float

    @property
    def passed(self):
        return self.empirical_coverage >= self.nominal_floor - 3.0 * self.std_error

    @property
    def floor_with_margin(self):
        return self.nominal_floor - 3.0 * self.std_error


def substream(seed, index=0):
    """Independent Philox generator for (seed, index)."""
    return np.random.Generator(np.random.Philox(key=(seed & _KEY_MASK) | (index << 64)))


def exponential_from_uniform(mean, u):
    """Inverse-CDF transform -mean * log(u) for u in (0, 1]."""
    return -mean * np.log(u)


def sample_exponential(mean, count, seed, stream=0):
    if not (math.isfinite(mean) and mean > 0):
        raise ValueError(f"mean must be positive, got {mean}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    u = 1.0 - substream(seed, stream).random(count)
    return exponential_from_uniform(mean, u)


def _trial_total(config, index):
    return float(np.sum(sample_exponential(config.mean_duration, config.n_per_trial,
                                           config.seed, index)))


def _estimate(config, total):
    n = config.n_per_trial
    if config.target is Target.RATE:
        return n / total
    return total / n


def _is_hit(config, precision, total):
    eta = config.true_param
    return abs(_estimate(config, total) - eta) / eta < precision.epsilon


def _count_hits(config, precision, indices):
    return sum(1 for t in indices if _is_hit(config, precision, _trial_total(config, t)))


def _chunks(trials, workers):
    size = -(-trials // workers)
    return [range(lo, min(lo + size, trials)) for lo in range(0, trials, size)]


def run_coverage(config, precision, workers=1):
    """Replicate the estimator ``config.trials`` times and score |err|/eta < epsilon."""
    workers = max(1, min(int(workers), config.trials))
    if workers == 1:
        hits = _count_hits(config, precision, range(config.trials))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(lambda idx: _count_hits(config, precision, idx),
                             _chunks(config.trials, workers))
            hits = sum(parts)
    p = hits / config.trials
    return CoverageReport(
        trials=config.trials,
        hits=hits,
        empirical_coverage=p,
        std_error=math.sqrt(p * (1.0 - p) / config.trials),
        nominal_floor=precision.confidence,
    )


@dataclass(frozen=True)
class EventAlgebraCounts:
    """Per-trial agreement counts for the pivot-window identities.

    For RATE, ``mismatches`` counts trials where the relative-error event and
    2n/(1+eps) < Y < 2n/(1-eps) disagree.  For SERVICE_MEAN it counts
    disagreements with 2n(1-eps) < Z < 2n(1+eps); ``implication_failures``
    counts trials inside the conservative window 2n(1+eps)/(1+2eps) < Z <
    2n(1+eps) where the event fails, and ``outside_conservative`` counts hits
    lying outside it (allowed).
    """

    trials: int
    hits: int
    mismatches: int
    implication_failures: int = 0
    outside_conservative: int = 0

    @property
    def ok(self):
        return self.mismatches == 0 and self.implication_failures == 0


def event_algebra_counts(config, precision):
    eps = precision.epsilon
    n = config.n_per_trial
    eta = config.true_param
    hits = mismatches = implication_failures = outside = 0
    for t in range(config.trials):
        total = _trial_total(config, t)
        hit = _is_hit(config, precision, total)
        hits += hit
        if config.target is Target.RATE:
            y = 2.0 * eta * total
            in_window = 2.0 * n / (1.0 + eps) < y < 2.0 * n / (1.0 - eps)
            mismatches += hit != in_window
        else:
            z = 2.0 * total / eta
            in_exact = 2.0 * n * (1.0 - eps) < z < 2.0 * n * (1.0 + eps)
            in_conservative = 2.0 * n * (1.0 + eps) / (1.0 + 2.0 * eps) < z < 2.0 * n * (1.0 + eps)
            mismatches += hit != in_exact
            implication_failures += in_conservative and not hit
            outside += hit and not in_conservative
    return EventAlgebraCounts(config.trials, hits, mismatches, implication_failures, outside)


def verify_event_algebra(config, precision):
    """True iff the pivot-window identities hold on every simulated trial."""
    return event_algebra_counts(config, precision).ok
