"""Poisson lower tail g(m, x) and the chi-square(2n) survival/quantile built on it.

g(m, x) = e^-x * sum_{i=0}^{m-1} x^i / i!  is Pr{K <= m-1} for K ~ Poisson(x),
and also Pr{Y > 2x} for Y ~ chi2(2m).  The planner needs it at x ~ 1e5 where
e^-x underflows, so every sum is anchored at its largest term: the anchor's
logarithm is computed with the saddle-point (Loader) form of the Poisson pmf
and the remaining terms are generated as ratios to it, walking away from the
mode until they stop contributing.  For x < m the upper tail is summed
instead and subtracted from one.
"""

import math

__all__ = [
    "chi_square_quantile",
    "chi_square_survival",
    "log_poisson_pmf",
    "log_poisson_tail",
    "poisson_tail",
]

_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Terms whose ratio to the running sum drops below this are dropped.
_TRUNCATION = 1e-18


def _check_count(name, value):
    if isinstance(value, bool) or not isinstance(value, int):
        if not (isinstance(value, float) and value.is_integer()):
            raise TypeError(f"{name} must be an integer, got {value!r}")
        value = int(value)
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    return value


def _check_nonneg_finite(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    if value < 0:
        raise ValueError(f"{name} must be >= 0, got {value}")
    return value


def _stirlerr(k):
    """log(k!) - [(k + 1/2) log k - k + log sqrt(2 pi)], for integer k >= 1."""
    if k <= 15:
        return math.lgamma(k + 1.0) - (k + 0.5) * math.log(k) + k - _LN_SQRT_2PI
    s0 = 1.0 / 12
    s1 = 1.0 / 360
    s2 = 1.0 / 1260
    s3 = 1.0 / 1680
    s4 = 1.0 / 1188
    kk = float(k) * k
    if k > 500:
        return (s0 - s1 / kk) / k
    if k > 80:
        return (s0 - (s1 - s2 / kk) / kk) / k
    if k > 35:
        return (s0 - (s1 - (s2 - s3 / kk) / kk) / kk) / k
    return (s0 - (s1 - (s2 - (s3 - s4 / kk) / kk) / kk) / kk) / k


def _bd0(k, x):
    """k log(k/x) + x - k without cancellation when k is close to x."""
    if abs(k - x) < 0.1 * (k + x):
        v = (k - x) / (k + x)
        s = (k - x) * v
        ej = 2.0 * k * v
        v2 = v * v
        j = 1
        while True:
            ej *= v2
            s_next = s + ej / (2 * j + 1)
            if s_next == s:
                return s_next
            s = s_next
            j += 1
    return k * math.log(k / x) + x - k


def log_poisson_pmf(k, x):
    """log of e^-x x^k / k! for integer k >= 0 and x > 0."""
    if k == 0:
        return -x
    return -_stirlerr(k) - _bd0(float(k), x) - _LN_SQRT_2PI - 0.5 * math.log(k)


def _lower_tail(m, x):
    """Pr{K <= m-1} for K ~ Poisson(x), x >= m; terms decrease from i = m-1 down."""
    top = m - 1
    t = 1.0
    parts = [1.0]
    total = 1.0
    for i in range(top, 0, -1):
        t = t * i / x
        parts.append(t)
        total += t
        if t < _TRUNCATION * total:
            break
    return log_poisson_pmf(top, x) + math.log(math.fsum(parts))


def _upper_tail(m, x):
    """Pr{K >= m} for K ~ Poisson(x), x < m; terms decrease from i = m upward."""
    log_anchor = log_poisson_pmf(m, x)
    t = 1.0
    parts = [1.0]
    total = 1.0
    i = m
    while True:
        t = t * x / (i + 1)
        parts.append(t)
        total += t
        if t < _TRUNCATION * total:
            break
        i += 1
    return math.exp(log_anchor) * math.fsum(parts)


def log_poisson_tail(m, x):
    """Natural log of g(m, x)."""
    m = _check_count("m", m)
    x = _check_nonneg_finite("x", x)
    if x == 0.0:
        return 0.0
    if x < m:
        # g >= ~1/2 here; the complement keeps ulp-level behaviour near 1
        return min(0.0, math.log1p(-min(1.0, _upper_tail(m, x))))
    return min(0.0, _lower_tail(m, x))


def poisson_tail(m, x):
    """g(m, x) = e^-x * sum_{i=0}^{m-1} x^i / i!, clamped to [0, 1].

    >>> poisson_tail(1, 0.0)
    1.0
    >>> round(poisson_tail(5, 2.0), 12)
    0.947346982656
    """
    m = _check_count("m", m)
    x = _check_nonneg_finite("x", x)
    if x == 0.0:
        return 1.0
    if x < m:
        return min(1.0, max(0.0, 1.0 - _upper_tail(m, x)))
    return min(1.0, max(0.0, math.exp(log_poisson_tail(m, x))))


def chi_square_survival(half_dof, threshold):
    """Pr{Y > threshold} for Y ~ chi2(2 * half_dof), i.e. g(half_dof, threshold / 2)."""
    half_dof = _check_count("half_dof", half_dof)
    threshold = _check_nonneg_finite("threshold", threshold)
    return poisson_tail(half_dof, threshold / 2.0)


def chi_square_quantile(half_dof, tail_prob):
    """Upper-tail quantile: the y with chi_square_survival(half_dof, y) == tail_prob.

    Bisection on the (decreasing) survival function.  The initial bracket is
    the chi2(2n) mean plus 20 standard deviations, doubled as needed.
    """
    half_dof = _check_count("half_dof", half_dof)
    tail_prob = float(tail_prob)
    if not 0.0 < tail_prob < 1.0:
        raise ValueError(f"tail_prob must lie in (0, 1), got {tail_prob}")

    dof = 2 * half_dof
    lo = 0.0
    hi = 2.0 * dof + 20.0 * math.sqrt(2.0 * dof) + 20.0
    while chi_square_survival(half_dof, hi) > tail_prob:
        lo = hi
        hi *= 2.0

    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        s = chi_square_survival(half_dof, mid)
        if s > tail_prob:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
