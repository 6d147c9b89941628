"""Small statistical helpers shared by the Monte Carlo layers."""

from __future__ import annotations

import math

import numpy as np


def wilson_ci(successes: int, trials: int, z: float = 1.959963984540054):
    """Wilson score interval for a binomial proportion (default 95%)."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials**2))
    # rounding can push the bounds a hair past the point estimate
    lo = min(max(0.0, center - half), p)
    hi = max(min(1.0, center + half), p)
    return lo, hi


def covariance_with_se(a: np.ndarray, b: np.ndarray):
    """Sample covariance of two paired series and its standard error.

    The SE comes from the influence function of the covariance
    functional: IF_i = (a_i - mean a)(b_i - mean b) - cov.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("need two equal-length 1-d arrays")
    n = a.size
    da = a - a.mean()
    db = b - b.mean()
    prod = da * db
    cov = float(prod.mean())
    se = float(np.std(prod - cov, ddof=1) / math.sqrt(n))
    return cov, se


def log_slope(r: np.ndarray, log_amp: np.ndarray) -> float:
    """Least-squares slope of log-amplitude against shell radius."""
    r = np.asarray(r, dtype=np.float64)
    log_amp = np.asarray(log_amp, dtype=np.float64)
    if r.size < 2:
        raise ValueError("slope fit needs at least two shells")
    coeffs = np.polyfit(r, log_amp, deg=1)
    return float(coeffs[0])
