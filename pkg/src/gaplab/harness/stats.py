"""Expected-best-of-k estimation over hyperparameter sweep results.

Given n run outcomes, the expected maximum of k independent draws (without
replacement structure handled by the U-statistic) is estimated unbiasedly as

    E[max of k] = sum_{i=k..n} C(i-1, k-1) / C(n, k) * x_(i)

over ascending order statistics x_(1..n). Uncertainty bands come from a
plain nonparametric bootstrap of the run outcomes.
"""

from __future__ import annotations

import math

import numpy as np

from ..seeding import rng_for


def expected_max_ustat(values, k: int) -> float:
    x = np.sort(np.asarray(values, dtype=np.float64))
    n = x.shape[0]
    if n < 1:
        raise ValueError("need at least one value")
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    denom = math.comb(n, k)
    total = 0.0
    for i in range(k, n + 1):
        total += math.comb(i - 1, k - 1) / denom * x[i - 1]
    return float(total)


def bootstrap_band(values, k: int, n_resamples: int = 1000,
                   quantiles=(0.25, 0.75), seed: int = 0) -> tuple[float, float]:
    x = np.asarray(values, dtype=np.float64)
    n = x.shape[0]
    if n < 1:
        raise ValueError("need at least one value")
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    rng = rng_for(seed, "bootstrap", k)
    stats = np.empty(n_resamples)
    for r in range(n_resamples):
        stats[r] = expected_max_ustat(x[rng.integers(0, n, size=n)], k)
    lo, hi = np.quantile(stats, quantiles)
    return float(lo), float(hi)


def expected_max_curve(values, max_k: int = 45, n_resamples: int = 1000,
                       seed: int = 0) -> dict:
    """Point estimates and bootstrap bands for k = 1..min(max_k, n).

    Bands are widened where needed so they always include the point
    estimate (they are display ranges, not confidence intervals).
    """
    n = len(values)
    ks = list(range(1, min(max_k, n) + 1))
    mean, lo, hi = [], [], []
    for k in ks:
        est = expected_max_ustat(values, k)
        b_lo, b_hi = bootstrap_band(values, k, n_resamples=n_resamples, seed=seed)
        mean.append(est)
        lo.append(min(b_lo, est))
        hi.append(max(b_hi, est))
    return {"k": ks, "mean": mean, "lo": lo, "hi": hi}
