"""Discrete multiplicative chaos measures in every variant used downstream.

A measure lives on the grid as one mass per cell (measure semantics, not
densities), batched over replicas: masses have shape (R, *spatial).
Subcritical masses are h^d exp(gamma s - (gamma^2/2) sigma^2) with the
exact analytic variance of the supplied field approximation in the
exponent, never an empirical variance, so E[mass] = h^d identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import QualityError
from .grids import GridSpec

Array = np.ndarray

VARIANTS = ("subcritical", "critical", "option1", "option2")


def critical_gamma(d: int) -> float:
    return float(np.sqrt(2.0 * d))


@dataclass(frozen=True)
class ChaosMeasure:
    """Replica batch of cell-mass measures at one approximation scale."""

    grid: GridSpec
    gamma: float
    variant: str
    masses: Array
    eps: float | None = None

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        expect = (self.masses.ndim == self.grid.d + 1
                  and self.masses.shape[1:] == self.grid.shape)
        if not expect:
            raise ValueError(
                f"masses must have shape (R, {'x'.join(map(str, self.grid.shape))}), "
                f"got {self.masses.shape}"
            )
        if not np.all(np.isfinite(self.masses)) or np.any(self.masses < 0):
            raise ValueError("masses must be finite and nonnegative")

    @property
    def n_replicas(self) -> int:
        return self.masses.shape[0]

    def total_mass(self) -> Array:
        axes = tuple(range(1, self.masses.ndim))
        return self.masses.sum(axis=axes)


def _batched(values: Array, grid: GridSpec) -> Array:
    values = np.asarray(values, dtype=float)
    if values.ndim == grid.d:
        values = values[None]
    if values.ndim != grid.d + 1 or values.shape[1:] != grid.shape:
        raise ValueError(
            f"field values must match the grid shape {grid.shape}, "
            f"got {values.shape}"
        )
    return values


def gmc_subcritical(values, variance, gamma: float, grid: GridSpec,
                    eps: float | None = None) -> ChaosMeasure:
    """Subcritical chaos h^d exp(gamma s - (gamma^2/2) sigma^2(x)).

    variance is the exact pointwise variance of the approximation:
    log(1/eps) for cut-off fields, the truncated KL table for the GFF.
    """
    gamma = float(gamma)
    if not 0 <= gamma < critical_gamma(grid.d):
        raise ValueError(
            f"subcritical range is 0 <= gamma < {critical_gamma(grid.d):.4f}, "
            f"got {gamma}"
        )
    values = _batched(values, grid)
    variance = np.broadcast_to(np.asarray(variance, dtype=float), grid.shape)
    masses = grid.cell_volume * np.exp(
        gamma * values - 0.5 * gamma**2 * variance
    )
    return ChaosMeasure(grid=grid, gamma=gamma, variant="subcritical",
                        masses=masses, eps=eps)


def gmc_critical(values, variance, grid: GridSpec, eps: float) -> ChaosMeasure:
    """Critical chaos at gamma_c = sqrt(2d) with its scale factor.

    The measure is the gamma_c subcritical formula multiplied by
    sqrt(log(1/eps)), the deterministic factor that keeps critical
    approximations from collapsing to zero.
    """
    if not 0 < eps < 1:
        raise ValueError(f"critical factor needs eps in (0, 1), got {eps}")
    gc = critical_gamma(grid.d)
    values = _batched(values, grid)
    variance = np.broadcast_to(np.asarray(variance, dtype=float), grid.shape)
    masses = (
        np.sqrt(np.log(1.0 / eps))
        * grid.cell_volume
        * np.exp(gc * values - 0.5 * gc**2 * variance)
    )
    return ChaosMeasure(grid=grid, gamma=gc, variant="critical",
                        masses=masses, eps=eps)


def chaos_option1(nu: ChaosMeasure, h_values) -> ChaosMeasure:
    """Tilt a Gaussian chaos by the perturbation: masses times e^{gamma H}."""
    h = _batched(h_values, nu.grid)
    if h.shape[0] not in (1, nu.n_replicas):
        raise ValueError(
            f"perturbation replicas {h.shape[0]} do not match chaos "
            f"replicas {nu.n_replicas}"
        )
    return ChaosMeasure(
        grid=nu.grid,
        gamma=nu.gamma,
        variant="option1",
        masses=nu.masses * np.exp(nu.gamma * h),
        eps=nu.eps,
    )


@dataclass(frozen=True)
class NormalizerTable:
    """Per-point estimate of E[e^{gamma X_eps(x)}] for option-2 chaos.

    n_replicas = 0 marks a closed-form table (SE identically zero).
    """

    values: Array
    se: Array
    n_replicas: int

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        s = np.asarray(self.se, dtype=float)
        if np.any(v <= 0) or not np.all(np.isfinite(v)):
            raise ValueError("normalizer entries must be strictly positive")
        if np.any(s < 0) or not np.all(np.isfinite(s)):
            raise ValueError("normalizer SEs must be finite and nonnegative")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "se", s)

    @classmethod
    def closed_form(cls, gamma: float, variance) -> "NormalizerTable":
        """Lognormal moment E[e^{gamma X}] = e^{(gamma^2/2) Var X}."""
        v = np.exp(0.5 * gamma**2 * np.asarray(variance, dtype=float))
        return cls(values=v, se=np.zeros_like(v), n_replicas=0)

    @classmethod
    def from_samples(cls, x_values: Array, gamma: float, grid: GridSpec) -> "NormalizerTable":
        x = _batched(x_values, grid)
        if x.shape[0] < 2:
            raise ValueError("need at least 2 replicas for a Monte Carlo table")
        w = np.exp(gamma * x)
        return cls(
            values=w.mean(axis=0),
            se=w.std(axis=0, ddof=1) / np.sqrt(x.shape[0]),
            n_replicas=x.shape[0],
        )


def chaos_option2(x_values, normalizers: NormalizerTable, grid: GridSpec,
                  gamma: float, eps: float | None = None) -> ChaosMeasure:
    """Ratio-normalized chaos h^d e^{gamma X} / E[e^{gamma X}]."""
    gamma = float(gamma)
    if not 0 <= gamma < critical_gamma(grid.d):
        raise ValueError(
            f"option2 needs gamma below {critical_gamma(grid.d):.4f}, got {gamma}"
        )
    x = _batched(x_values, grid)
    norm = np.broadcast_to(normalizers.values, grid.shape)
    rel = np.broadcast_to(normalizers.se, grid.shape) / norm
    if rel.max() > 0.05:
        raise QualityError(
            f"normalizer SE/value reaches {rel.max():.3f} > 0.05; "
            "increase normalizer replicas"
        )
    masses = grid.cell_volume * np.exp(gamma * x) / norm
    return ChaosMeasure(grid=grid, gamma=gamma, variant="option2",
                        masses=masses, eps=eps)


def integrate(nu: ChaosMeasure, f) -> Array:
    """nu(f) = sum_i f(x_i) m_i per replica, shape (R,).

    f may be a callable on points or an array of grid values.
    """
    if callable(f):
        pts = nu.grid.points()
        fv = np.asarray(f(pts[:, 0]) if nu.grid.d == 1 else f(pts[:, 0], pts[:, 1]))
        fv = fv.reshape(nu.grid.shape)
    else:
        fv = np.asarray(f, dtype=float)
        if fv.shape != nu.grid.shape:
            raise ValueError(
                f"f values must have grid shape {nu.grid.shape}, got {fv.shape}"
            )
    if not np.all(np.isfinite(fv)):
        raise ValueError("f must be finite on the grid")
    axes = tuple(range(1, nu.masses.ndim))
    return (nu.masses * fv).sum(axis=axes)


def smooth_at(nu: ChaosMeasure, mollifier, x_index) -> Array:
    """Mollified mass sum_i eta_eps(x_i - x) m_i at one center, per replica.

    The center must keep the mollifier support inside the domain, which
    holds exactly when it lies in the inner region and eps <= margin.
    """
    grid = nu.grid
    k = mollifier.half_width
    if grid.d == 1:
        i = int(x_index)
        if i - k < 0 or i + k >= grid.n:
            raise ValueError("mollifier support leaves the domain at this center")
        vals = nu.masses[:, i - k : i + k + 1] @ mollifier.weights
    else:
        i, j = int(x_index[0]), int(x_index[1])
        if min(i, j) - k < 0 or max(i, j) + k >= grid.n:
            raise ValueError("mollifier support leaves the domain at this center")
        window = nu.masses[:, i - k : i + k + 1, j - k : j + k + 1]
        vals = np.tensordot(window, mollifier.weights, axes=([1, 2], [0, 1]))
    _flag_underflow(vals)
    return vals


def smooth_field(nu: ChaosMeasure, mollifier) -> Array:
    """Mollified masses at every inner grid center, shape (R, *inner)."""
    grid = nu.grid
    if mollifier.eps > grid.margin + 1e-12:
        raise ValueError(
            f"mollifier scale {mollifier.eps} exceeds the inner margin "
            f"{grid.margin}"
        )
    inner = grid.inner_slice()
    if grid.d == 1:
        full = ndimage.correlate1d(nu.masses, mollifier.weights, axis=1,
                                   mode="constant")
        vals = full[:, inner]
    else:
        full = ndimage.correlate(
            nu.masses, mollifier.weights[None], mode="constant"
        )
        vals = full[:, inner, inner]
    _flag_underflow(vals)
    return vals


def _flag_underflow(vals: Array) -> None:
    if np.any(vals <= 0.0):
        raise QualityError(
            "mollified measure underflowed to zero; masses too small to smooth"
        )
