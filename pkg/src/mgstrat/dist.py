"""Poisson and binomial probability kernels.

Everything is evaluated in log space through the log-gamma function, so
counts and means up to ~1e7 stay finite where naive factorials would
overflow.  Cumulative sums truncate at :func:`poisson_tail_cutoff` terms,
which leaves a residual tail mass below 1e-12.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

__all__ = [
    "poisson_pmf",
    "poisson_pmf_vector",
    "poisson_cdf",
    "poisson_tail_cutoff",
    "binomial_pmf",
    "binomial_cdf",
    "sample_binomial",
]


def _check_count(value: int, name: str) -> None:
    if value != int(value) or value < 0:
        raise ValueError(f"{name} must be a nonnegative integer, got {value}")


def _check_mean(lam: float) -> None:
    if not (lam >= 0.0) or math.isinf(lam):
        raise ValueError(f"mean must be finite and nonnegative, got {lam}")


def _check_probability(p: float) -> None:
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"probability must lie in [0, 1], got {p}")


def poisson_tail_cutoff(lam: float) -> int:
    """Count past which the remaining Poisson(lam) mass is below 1e-12."""
    _check_mean(lam)
    return int(math.ceil(lam + 12.0 * math.sqrt(lam) + 20.0))


def poisson_pmf(r: int, lam: float) -> float:
    """P(X = r) for X ~ Poisson(lam)."""
    _check_count(r, "r")
    _check_mean(lam)
    if lam == 0.0:
        return 1.0 if r == 0 else 0.0
    return math.exp(r * math.log(lam) - lam - math.lgamma(r + 1))


def poisson_pmf_vector(r_max: int, lam: float) -> np.ndarray:
    """Poisson(lam) pmf at every count 0..r_max, as one array."""
    _check_count(r_max, "r_max")
    _check_mean(lam)
    if lam == 0.0:
        out = np.zeros(r_max + 1)
        out[0] = 1.0
        return out
    r = np.arange(r_max + 1, dtype=np.float64)
    return np.exp(r * math.log(lam) - lam - gammaln(r + 1.0))


def poisson_cdf(r: int, lam: float) -> float:
    """P(X <= r) for X ~ Poisson(lam), clipped into [0, 1]."""
    _check_count(r, "r")
    _check_mean(lam)
    if lam == 0.0:
        return 1.0
    top = min(r, poisson_tail_cutoff(lam))
    total = float(poisson_pmf_vector(top, lam).sum())
    return min(total, 1.0)


def binomial_pmf(r: int, n: int, p: float) -> float:
    """P(X = r) for X ~ Binomial(n, p); log-space, safe for n ~ 1e7."""
    _check_count(r, "r")
    _check_count(n, "n")
    _check_probability(p)
    if r > n:
        raise ValueError(f"r must not exceed n, got r={r}, n={n}")
    if p == 0.0:
        return 1.0 if r == 0 else 0.0
    if p == 1.0:
        return 1.0 if r == n else 0.0
    log_choose = math.lgamma(n + 1) - math.lgamma(r + 1) - math.lgamma(n - r + 1)
    return math.exp(log_choose + r * math.log(p) + (n - r) * math.log1p(-p))


def binomial_cdf(r: int, n: int, p: float) -> float:
    """P(X <= r) for X ~ Binomial(n, p), clipped into [0, 1]."""
    _check_count(r, "r")
    _check_count(n, "n")
    _check_probability(p)
    if p == 0.0:
        return 1.0
    if p == 1.0:
        return 1.0 if r >= n else 0.0
    top = min(r, n)
    k = np.arange(top + 1, dtype=np.float64)
    log_choose = gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)
    total = float(np.exp(log_choose + k * math.log(p) + (n - k) * math.log1p(-p)).sum())
    return min(total, 1.0)


def sample_binomial(n: int, p: float, rng: np.random.Generator) -> int:
    """One Binomial(n, p) draw from the supplied generator."""
    _check_count(n, "n")
    _check_probability(p)
    return int(rng.binomial(n, p))
