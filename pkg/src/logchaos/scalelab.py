"""Scale-dependence experiments: thick points, exponent transfer, and the
number-theoretic models that delimit when reconstruction can work.

The zeta model is the random Euler-product field
Re sum_k (2 p_k)^{-1/2} (W_k^R + i W_k^I) p_k^{-ix}; its g_N ratio
compares the normalizer of the Gaussianized field with the exact one.
The circle model is the lacunary product prod (1 - lambda_n e^{i theta_n})
with lambda_n^2 = 1/(n log n), whose g_N decays to zero and certifies
that no finite counter term exists there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .chaos import ChaosMeasure, critical_gamma
from .fields import FieldEnsemble, replica_rng
from .grids import GridSpec
from .statlab import StatReport

Array = np.ndarray


# ---------------------------------------------------------------------------
# thick points

@dataclass(frozen=True)
class ThickPointMeasure:
    """Normalized indicator measure of gamma-thick points at scale eps."""

    grid: GridSpec
    gamma: float
    eps: float
    threshold: float
    p_exceed: float
    masses: Array

    @property
    def n_replicas(self) -> int:
        return self.masses.shape[0]


def thick_point_measure(ens: FieldEnsemble, eps: float, gamma: float) -> ThickPointMeasure:
    """h^d 1{S_eps(x) >= gamma log(1/eps)} / P(exceed), per replica.

    The normalization is the exact Gaussian tail for the stationary
    cut-off field, Var S_eps = log(1/eps); anything but a FieldEnsemble
    is refused because that analytic variance would not apply.
    """
    if not isinstance(ens, FieldEnsemble):
        raise ValueError(
            "thick points need the stationary cut-off ensemble; the "
            "normalizing tail probability is analytic only there"
        )
    if not 0 <= gamma < critical_gamma(ens.grid.d):
        raise ValueError(
            f"thick-point range is 0 <= gamma < {critical_gamma(ens.grid.d):.4f}, "
            f"got {gamma}"
        )
    values = ens.at_scale(eps)
    log_inv = np.log(1.0 / eps)
    threshold = gamma * log_inv
    # P(N(0, log 1/eps) >= gamma log 1/eps) = Phi(-gamma sqrt(log 1/eps))
    p = float(special.ndtr(-gamma * np.sqrt(log_inv)))
    if p <= 0:
        raise ValueError(f"tail probability underflows at eps={eps}, gamma={gamma}")
    masses = ens.grid.cell_volume * (values >= threshold).astype(float) / p
    return ThickPointMeasure(grid=ens.grid, gamma=float(gamma), eps=float(eps),
                             threshold=float(threshold), p_exceed=p,
                             masses=masses)


def integrate_masses(masses: Array, f_values: Array) -> Array:
    """sum_i f(x_i) m_i per replica for any cell-mass batch."""
    fv = np.asarray(f_values, dtype=float)
    if fv.shape != masses.shape[1:]:
        raise ValueError(
            f"f values shape {fv.shape} does not match mass shape {masses.shape[1:]}"
        )
    axes = tuple(range(1, masses.ndim))
    return (masses * fv).sum(axis=axes)


def relative_l2(samples: Array, reference: Array) -> StatReport:
    """Relative L2 distance sqrt(E (a-b)^2 / E b^2) with a delta-method SE."""
    a = np.asarray(samples, dtype=float)
    b = np.asarray(reference, dtype=float)
    if a.shape != b.shape:
        raise ValueError("paired samples must have equal shapes")
    n = a.shape[0]
    if n < 2:
        raise ValueError("need at least 2 paired samples")
    d2 = (a - b) ** 2
    m = d2.mean()
    q = float((b**2).mean())
    if q <= 0:
        raise ValueError("reference has zero power")
    se_m = d2.std(ddof=1) / np.sqrt(n)
    rel = float(np.sqrt(m / q))
    se = float(se_m / (2.0 * np.sqrt(max(m, 1e-300) * q)))
    return StatReport(estimate=rel, se=se, n=n)


# ---------------------------------------------------------------------------
# exponent transfer

@dataclass(frozen=True)
class TransferMeasure:
    """Measure built from a gamma0 chaos raised to the power gamma/gamma0."""

    grid: GridSpec
    gamma0: float
    gamma: float
    eps: float
    masses: Array
    normalizer: StatReport


def gamma_transfer(source: ChaosMeasure, gamma: float, mollifier) -> TransferMeasure:
    """t_eps = h^d (nu_gamma0 * eta_eps)^{gamma/gamma0} / E[same].

    Guards: both exponents must sit strictly inside (0, sqrt(d)) and the
    product gamma*gamma0 below 2d, else the power q = gamma/gamma0 can
    cross the moment barrier q_c = 2d/gamma0^2 and the normalizer has no
    finite target.
    """
    from .chaos import smooth_field

    d = source.grid.d
    gamma0 = source.gamma
    root_d = float(np.sqrt(d))
    if not 0 < gamma0 < root_d:
        raise ValueError(
            f"transfer source exponent must lie in (0, sqrt(d))=(0, {root_d:.4f}), "
            f"got gamma0={gamma0}"
        )
    if not 0 < gamma < root_d:
        raise ValueError(
            f"transfer target exponent must lie in (0, sqrt(d))=(0, {root_d:.4f}), "
            f"got gamma={gamma}"
        )
    if gamma * gamma0 >= 2.0 * d:
        raise ValueError(
            f"gamma*gamma0 = {gamma * gamma0:.4f} >= 2d; the power "
            f"gamma/gamma0 crosses the moment barrier q_c = 2d/gamma0^2"
        )
    w = smooth_field(source, mollifier)
    p = gamma / gamma0
    wp = w**p
    r = wp.shape[0]
    per_rep = wp.reshape(r, -1).mean(axis=1)
    n_hat = float(per_rep.mean())
    se = float(per_rep.std(ddof=1) / np.sqrt(r)) if r > 1 else 0.0
    masses = source.grid.cell_volume * wp / n_hat
    return TransferMeasure(
        grid=source.grid, gamma0=float(gamma0), gamma=float(gamma),
        eps=mollifier.eps, masses=masses,
        normalizer=StatReport(estimate=n_hat, se=se, n=r),
    )


# ---------------------------------------------------------------------------
# zeta model

def _sieve_primes(count: int) -> tuple[int, ...]:
    if count < 1:
        raise ValueError("need at least one prime")
    # p_n < n (ln n + ln ln n) for n >= 6; pad smaller counts
    limit = 15 if count < 6 else int(count * (np.log(count) + np.log(np.log(count)))) + 10
    while True:
        is_p = np.ones(limit + 1, dtype=bool)
        is_p[:2] = False
        for q in range(2, int(limit**0.5) + 1):
            if is_p[q]:
                is_p[q * q :: q] = False
        primes = np.flatnonzero(is_p)
        if len(primes) >= count:
            return tuple(int(p) for p in primes[:count])
        limit *= 2


@dataclass(frozen=True)
class ZetaModel:
    """Random Euler-product field truncated to the first n_primes primes."""

    n_primes: int
    gamma: float
    primes: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        if self.n_primes < 1:
            raise ValueError("n_primes must be >= 1")
        if not 0 < self.gamma:
            raise ValueError("gamma must be positive")
        object.__setattr__(self, "primes", _sieve_primes(self.n_primes))

    def covariance(self, r) -> Array:
        """Cov(x, x+r) = sum_k cos(r log p_k) / (2 p_k)."""
        r = np.asarray(r, dtype=float)
        logs = np.log(np.asarray(self.primes, dtype=float))
        inv = 1.0 / (2.0 * np.asarray(self.primes, dtype=float))
        return np.cos(np.multiply.outer(r, logs)) @ inv

    @property
    def variance(self) -> float:
        return float(sum(1.0 / (2.0 * p) for p in self.primes))


def zeta_field_sample(model: ZetaModel, x: Array, n_replicas: int,
                      rng_seed: int) -> Array:
    """Samples of the zeta-model field at the given points, (R, len(x))."""
    x = np.asarray(x, dtype=float)
    logs = np.log(np.asarray(model.primes, dtype=float))
    amp = 1.0 / np.sqrt(2.0 * np.asarray(model.primes, dtype=float))
    cos_t = np.cos(np.multiply.outer(x, logs))
    sin_t = np.sin(np.multiply.outer(x, logs))
    out = np.empty((n_replicas, len(x)))
    for rep in range(n_replicas):
        rng = replica_rng(rng_seed, rep)
        w = rng.standard_normal((2, model.n_primes))
        out[rep] = cos_t @ (amp * w[0]) + sin_t @ (amp * w[1])
    out.setflags(write=False)
    return out


def _periodic_mean(f, tol: float = 1e-10, start: int = 64,
                   max_nodes: int = 1 << 17) -> float:
    """int_0^1 f(theta) dtheta by node-doubling trapezoid on [0, 1).

    The integrands here are smooth and 1-periodic, so the trapezoid rule
    converges spectrally; doubling stops when successive values agree to
    tol.
    """
    n = start
    prev = float(np.mean(f(np.arange(n) / n)))
    while n < max_nodes:
        n *= 2
        cur = float(np.mean(f(np.arange(n) / n)))
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise RuntimeError("periodic quadrature failed to settle")


def factor_moment_exact(lam: float, gamma: float) -> float:
    """E[|1 - lam e^{i 2 pi theta}|^{-gamma}], theta uniform on [0, 1)."""
    return _periodic_mean(
        lambda th: (1.0 - 2.0 * lam * np.cos(2.0 * np.pi * th) + lam**2)
        ** (-gamma / 2.0)
    )


def small_lambda_log_moment(gamma: float, lam: float) -> float:
    """f(lam) = log E[|1 - lam e^{i 2 pi theta}|^{gamma}].

    For small lam this behaves as (gamma^2/4) lam^2; note the positive
    exponent here, mirrored from the negative one in the factor moments.
    """
    val = _periodic_mean(
        lambda th: (1.0 - 2.0 * lam * np.cos(2.0 * np.pi * th) + lam**2)
        ** (gamma / 2.0)
    )
    return float(np.log(val))


def zeta_gn_ratio(gamma: float, n_max: int) -> Array:
    """g_N = prod_{k<=N} E_k^G / E_k^X for the zeta model, N = 1..n_max.

    E_k^G = e^{gamma^2/(4 p_k)} is the Gaussianized factor moment with
    matched variance; E_k^X = E[|1 - p_k^{-1/2} e^{i 2 pi theta}|^{-gamma}]
    is the exact one, by quadrature.  The sequence stabilizes to a
    strictly positive limit, which is what leaves room for a finite
    counter term on this field.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if not 0 < gamma < np.sqrt(2.0):
        raise ValueError(f"gamma must lie in (0, sqrt(2)), got {gamma}")
    primes = np.asarray(_sieve_primes(n_max), dtype=float)
    log_ratio = np.empty(n_max)
    for k, p in enumerate(primes):
        gauss = gamma**2 / (4.0 * p)
        exact = factor_moment_exact(1.0 / np.sqrt(p), gamma)
        log_ratio[k] = gauss - np.log(exact)
    return np.exp(np.cumsum(log_ratio))


def circle_counterexample_gn(gamma: float, n_max: int) -> Array:
    """g_N for the lacunary circle field, N = 2..n_max (entry [i] is g_{i+2}).

    Partial products of exp(-gamma^2/(n log n) - gamma^2/(2 n log^2 n)),
    started at n = 2 where the n = 1 factor is formally log(1) = 0.  The
    harmonic-log tail makes log g_N ~ -gamma^2 log log N, so g_N -> 0 and
    no finite counter term exists for this field.
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    n = np.arange(2, n_max + 1, dtype=float)
    ln = np.log(n)
    terms = -(gamma**2) / (n * ln) - gamma**2 / (2.0 * n * ln**2)
    return np.exp(np.cumsum(terms))
