"""Seed covariance profiles and the covariance integrals built from them.

A star-scale invariant field has covariance

    C(x, y) = integral_1^inf k1(t |x - y|) dt / t = log(1/|x-y|) + g(|x-y|),

where the seed profile k1 is continuous, positive definite, supported in
[0, 1) and k1(0) = 1. The cut-off approximation at scale eps keeps
frequencies up to 1/eps:

    K_eps(r) = integral_1^{1/eps} k1(s r) ds / s,

so Var S_eps = K_eps(0) = log(1/eps) exactly. Two example profiles are
provided, both self-convolutions of a ball indicator and hence positive
definite in their dimension:

    triangle (d=1): k1(r) = max(0, 1 - r)
    lens     (d=2): k1(r) = (2/pi) (arccos r - r sqrt(1 - r^2)) on [0, 1]

Everything below reduces to the profile tail integral
phi(u) = integral_u^1 k1(t) dt / t, which is closed form for the
triangle and cached adaptive quadrature (abs tol 1e-10) for the lens.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

Array = np.ndarray

_PROFILES = {"triangle": 1, "lens": 2}
QUAD_TOL = 1e-10


@dataclass(frozen=True)
class SeedCovariance:
    """A named seed profile tied to its ambient dimension."""

    d: int
    profile: str

    def __post_init__(self) -> None:
        if self.profile not in _PROFILES:
            raise ValueError(
                f"unknown profile {self.profile!r}; choose from "
                f"{sorted(_PROFILES)}"
            )
        if _PROFILES[self.profile] != self.d:
            raise ValueError(
                f"profile {self.profile!r} is defined for "
                f"d = {_PROFILES[self.profile]}, got d = {self.d}"
            )

    def k1(self, r) -> Array:
        """Profile value k1(r), vectorized, zero for r >= 1."""
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ValueError("distances must be nonnegative")
        if self.profile == "triangle":
            return np.maximum(0.0, 1.0 - r)
        rc = np.clip(r, 0.0, 1.0)
        val = (2.0 / np.pi) * (np.arccos(rc) - rc * np.sqrt(1.0 - rc * rc))
        return np.where(r < 1.0, val, 0.0)


def make_seed_covariance(d: int, profile: str) -> SeedCovariance:
    return SeedCovariance(d=d, profile=profile)


@lru_cache(maxsize=None)
def _phi_lens(u: float) -> float:
    # tail integral of k1(t)/t; integrand is smooth inside and vanishes
    # like (1-t)^{3/2} at t = 1
    lens = SeedCovariance(d=2, profile="lens")
    val, err = quad(
        lambda t: float(lens.k1(t)) / t, u, 1.0,
        epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200,
    )
    if err > 1e-8:
        raise RuntimeError(f"profile quadrature failed at u = {u}: err {err}")
    return val


def _phi(seed: SeedCovariance, u: Array) -> Array:
    """phi(u) = integral_u^1 k1(t)/t dt for u in (0, 1]; 0 beyond 1."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u <= 0):
        raise ValueError("phi needs strictly positive arguments")
    if seed.profile == "triangle":
        uc = np.minimum(u, 1.0)
        return -np.log(uc) - 1.0 + uc
    out = np.zeros_like(u)
    inside = u < 1.0
    if np.any(inside):
        vals, inv = np.unique(u[inside], return_inverse=True)
        looked = np.array([_phi_lens(float(v)) for v in vals])
        out[inside] = looked[inv]
    return out


def cutoff_covariance(seed: SeedCovariance, eps: float, r) -> Array:
    """Covariance K_eps(r) of the cut-off field at scale eps.

    K_eps(0) = log(1/eps); for 0 < r < 1 it equals
    integral_r^{min(1, r/eps)} k1(t)/t dt, and it vanishes for r >= 1.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("distances must be nonnegative")
    shape = r.shape
    r = np.atleast_1d(r)
    out = np.zeros(r.shape)
    zero = r == 0.0
    out[zero] = np.log(1.0 / eps)
    mid = (~zero) & (r < 1.0)
    if np.any(mid):
        rm = r[mid]
        out[mid] = _phi(seed, rm) - _phi(seed, np.minimum(1.0, rm / eps))
    return out.reshape(shape)


def cross_cutoff_covariance(seed: SeedCovariance, eps: float, delta: float, r) -> Array:
    """Cov(S_eps(x), S_delta(y)) at distance r: the coarser scale wins."""
    if not 0 < eps < 1 or not 0 < delta < 1:
        raise ValueError("scales must lie in (0, 1)")
    return cutoff_covariance(seed, max(eps, delta), r)


def increment_kernel(seed: SeedCovariance, eps_coarse: float, eps_fine: float, r) -> Array:
    """Stationary covariance of S_{eps_fine} - S_{eps_coarse}.

    Equals K_{eps_fine}(r) - K_{eps_coarse}(r); the increment is
    independent of the coarser field, so this is also its own kernel.
    """
    if not 0 < eps_fine < eps_coarse < 1:
        raise ValueError(
            f"need 0 < eps_fine < eps_coarse < 1, got "
            f"({eps_fine}, {eps_coarse})"
        )
    r = np.asarray(r, dtype=float)
    shape = r.shape
    r = np.atleast_1d(r)
    out = np.full(r.shape, np.log(eps_coarse / eps_fine))
    pos = r > 0.0
    if np.any(pos):
        rp = r[pos]
        out[pos] = _phi(seed, np.minimum(1.0, rp / eps_coarse)) - _phi(
            seed, np.minimum(1.0, rp / eps_fine)
        )
    return out.reshape(shape)


def g_remainder(seed: SeedCovariance, r, *, zero_limit: bool = False) -> Array:
    """Regular part g(r) = integral_r^1 (k1(t) - 1)/t dt of the covariance.

    g is the deviation of the full covariance from log(1/r). It has a
    finite limit at r = 0 which is only returned when zero_limit is set;
    a plain r = 0 raises, since the integral as written is singular
    there only removably.
    """
    if zero_limit:
        if seed.profile == "triangle":
            return np.asarray(-1.0)
        lens = seed.k1
        val, _ = quad(
            lambda t: (float(lens(t)) - 1.0) / t, 0.0, 1.0,
            epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200,
        )
        return np.asarray(val)
    r = np.asarray(r, dtype=float)
    if np.any(r == 0.0):
        raise ValueError(
            "g is singular-removable at r = 0; pass zero_limit=True "
            "for the limit value"
        )
    if np.any(r < 0) or np.any(r > 1.0):
        raise ValueError("g is defined for separations in (0, 1]")
    return (_phi(seed, np.atleast_1d(r)) + np.log(np.atleast_1d(r))).reshape(r.shape)


def _offset_norms(d: int, u) -> float:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (d,) and not (d == 1 and u.shape == (1,)):
        raise ValueError(f"offset must have shape ({d},), got {u.shape}")
    return float(np.linalg.norm(u))


def limit_increment_covariance(seed: SeedCovariance, u, v) -> float:
    """Limit covariance of the recentred zoom increments.

    C(u, v) = integral_0^1 [k1(s|u-v|) - k1(s|u|) - k1(s|v|) + 1]/s ds
    for offsets u, v in the closed unit ball. For the triangle profile
    the integrand is constant in s and the integral collapses to
    |u| + |v| - |u - v|.
    """
    return window_increment_covariance(seed, 0.0, u, v)


def window_increment_covariance(seed: SeedCovariance, eps: float, u, v) -> float:
    """Same integrand as the limit covariance, integrated over (eps, 1).

    This is the exact covariance of the zoom increments of the cut-off
    field at scale eps; eps = 0 recovers the limit.
    """
    if not 0 <= eps < 1:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    a = _offset_norms(seed.d, u)
    b = _offset_norms(seed.d, v)
    uv = np.atleast_1d(np.asarray(u, float)) - np.atleast_1d(np.asarray(v, float))
    c = float(np.linalg.norm(uv))
    if max(a, b) > 1.0 + 1e-12:
        raise ValueError("offsets must lie in the closed unit ball")
    k1 = seed.k1

    def integrand(s: float) -> float:
        return (
            float(k1(s * c)) - float(k1(s * a)) - float(k1(s * b)) + 1.0
        ) / s

    # integrand extends continuously to s = 0 (k1 is Lipschitz), so a
    # tiny positive lower limit loses nothing at the requested tolerance
    lo = max(eps, 1e-13)
    val, err = quad(integrand, lo, 1.0, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
    if err > 1e-8:
        raise RuntimeError(f"increment covariance quadrature failed: err {err}")
    return val
