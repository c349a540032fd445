"""Shared statistical estimators.

Every experiment-level pass/fail in this repository routes through these
helpers, always as a 3-SE band test and never as an exact float
comparison on a stochastic quantity. Reductions use numpy's fixed
left-to-right summation so repeated runs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as _scipy_stats

Array = np.ndarray


@dataclass(frozen=True)
class StatReport:
    """Point estimate with its standard error and 95% CI."""

    estimate: float
    se: float
    n: int
    target: float | None = None

    @property
    def ci_low(self) -> float:
        return self.estimate - 1.96 * self.se

    @property
    def ci_high(self) -> float:
        return self.estimate + 1.96 * self.se

    @property
    def passed(self) -> bool:
        """Whether the estimate sits within 3 SE of the declared target."""
        if self.target is None:
            raise ValueError("no target declared for this report")
        return abs(self.estimate - self.target) <= 3.0 * self.se

    def within(self, target: float) -> bool:
        return abs(self.estimate - target) <= 3.0 * self.se


def mc_mean_ci(samples, target: float | None = None) -> StatReport:
    """Sample mean with SE = sd/sqrt(n); needs at least two samples."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ValueError(f"need at least 2 samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    se = float(np.std(x, ddof=1) / np.sqrt(x.size))
    return StatReport(estimate=float(np.mean(x)), se=se, n=x.size, target=target)


def empirical_cov(vectors, pairs) -> list[tuple[float, float]]:
    """Unbiased covariance estimates with delete-one jackknife SEs.

    vectors has shape (R, npoints), one row per replica; pairs is a
    sequence of (i, j) column indices. Variances are the i == j case.
    """
    v = np.asarray(vectors, dtype=float)
    if v.ndim != 2:
        raise ValueError(f"expected (R, npoints) array, got shape {v.shape}")
    R = v.shape[0]
    if R < 30:
        raise ValueError(f"need at least 30 replicas for jackknife SEs, got {R}")
    out = []
    for i, j in pairs:
        x = v[:, i]
        y = v[:, j]
        est = float(np.cov(x, y, ddof=1)[0, 1])
        # delete-one covariances, vectorized over the left-out replica
        sx, sy, sxy = x.sum(), y.sum(), (x * y).sum()
        mx = (sx - x) / (R - 1)
        my = (sy - y) / (R - 1)
        loo = (sxy - x * y - (R - 1) * mx * my) / (R - 2)
        se = float(np.sqrt((R - 1) / R * np.sum((loo - loo.mean()) ** 2)))
        out.append((est, se))
    return out


def l2_error(a, b) -> StatReport:
    """Monte Carlo estimate of E[(a - b)^2] over paired replicas."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    sq = (a - b) ** 2
    if sq.size < 2:
        raise ValueError("need at least 2 pairs")
    return StatReport(
        estimate=float(sq.mean()),
        se=float(np.std(sq, ddof=1) / np.sqrt(sq.size)),
        n=sq.size,
    )


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    slope_se: float
    residuals: Array


def slope_fit(x, y) -> SlopeFit:
    """Ordinary least squares line through (x, y)."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape or x.size < 2:
        raise ValueError("need two equal-length samples of size >= 2")
    xc = x - x.mean()
    sxx = float(np.sum(xc**2))
    if sxx == 0.0:
        raise ValueError("x values are all identical")
    slope = float(np.sum(xc * y) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    if x.size > 2:
        sigma2 = float(np.sum(resid**2) / (x.size - 2))
        slope_se = float(np.sqrt(sigma2 / sxx))
    else:
        slope_se = 0.0
    return SlopeFit(slope=slope, intercept=intercept, slope_se=slope_se, residuals=resid)


def gaussianity_check(samples) -> tuple[float, float]:
    """Skewness and excess-kurtosis z-scores of a sample.

    Both are ~N(0,1) under Gaussian data, so |z| < 3 is the usual band.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 30:
        raise ValueError(f"need at least 30 samples, got {x.size}")
    if np.std(x) == 0.0:
        raise ValueError("constant sample has no shape statistics")
    skew_z = float(_scipy_stats.skewtest(x).statistic)
    kurt_z = float(_scipy_stats.kurtosistest(x).statistic)
    return skew_z, kurt_z


def max_share(samples, q: float = 1.0) -> float:
    """Share of the q-th power sum carried by the largest sample.

    A heavy-tail indicator: for E[X^q] finite the share decays to 0
    with sample size; past the moment threshold it stays macroscopic.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0 or np.any(x < 0):
        raise ValueError("need nonnegative samples")
    w = x**q
    total = float(w.sum())
    if total == 0.0:
        raise ValueError("all-zero samples")
    return float(w.max() / total)


def heavy_tail_flag(samples, q: float, share_cap: float = 0.1) -> bool:
    """Flag divergence of the q-th moment from replica masses.

    True when the max share fails to shrink from the first-quarter
    prefix to the full sample, or stays above share_cap: both are
    incompatible with a finite-sample-stable q-th moment.

    The 0.1 default separates the regimes at the replica counts used
    here (R >= 1000): with a finite q-th moment the top replica carries
    well under 10 percent of the power sum, while past the moment
    threshold its share has a macroscopic distributional limit.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 40:
        raise ValueError("need at least 40 samples for the prefix diagnostic")
    quarter = max_share(x[: x.size // 4], q)
    full = max_share(x, q)
    return bool(full > share_cap or full >= quarter)
