"""Independent reference computations used to pin expected values.

Nothing in here imports the package under test.
"""

import math

import mpmath
import numpy as np


def poisson_tail_mp(m, x, dps=40):
    """Term-by-term summation of e^-x * sum_{i<m} x^i/i! in high precision."""
    with mpmath.workdps(dps):
        x = mpmath.mpf(x)
        term = mpmath.exp(-x)
        total = term
        for i in range(1, m):
            term = term * x / i
            total += term
        return total


def poisson_tail_fsum(m, x):
    """Plain double-precision direct summation with compensated accumulation.

    Only usable while e^-x does not underflow (x below ~700).
    """
    term = math.exp(-x)
    terms = [term]
    for i in range(1, m):
        term = term * x / i
        terms.append(term)
    return math.fsum(terms)


def chi2_survival_quad(dof, y, dps=30):
    """Pr{Y > y} for Y ~ chi2(dof) by numerically integrating the density on [0, y]."""
    with mpmath.workdps(dps):
        k = mpmath.mpf(dof) / 2
        norm = 1 / (mpmath.power(2, k) * mpmath.gamma(k))

        def density(t):
            return norm * mpmath.power(t, k - 1) * mpmath.exp(-t / 2)

        if y == 0:
            return mpmath.mpf(1)
        mean = mpmath.mpf(dof)
        points = [0, min(mpmath.mpf(y), mean), mpmath.mpf(y)]
        return 1 - mpmath.quad(density, points)


def chi2_window_mc(dof, lo, hi, draws, seed):
    """Monte Carlo estimate (and standard error) of Pr{lo < Y < hi} for Y ~ chi2(dof)."""
    rng = np.random.default_rng(seed)
    y = rng.chisquare(dof, size=draws)
    p = float(np.mean((y > lo) & (y < hi)))
    return p, math.sqrt(p * (1 - p) / draws)


def least_n_linear(criterion_value, target, n_max):
    """Brute force scan for the least n with criterion_value(n) >= target."""
    for n in range(1, n_max + 1):
        if criterion_value(n) >= target:
            return n
    return None
