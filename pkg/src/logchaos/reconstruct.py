"""Field reconstruction from a chaos measure.

The estimator at scale eps reads the measure through a mollifier,
takes (1/gamma) log, and subtracts a counter term F(gamma, eps) that is
constant across test functions:

    <R_eps, psi> = sum_x psi(x) [ (1/gamma) log (nu * eta_eps)(x) - F ] h^d

summed over the inner region where the mollifier support stays inside
the domain.  The counter term is estimated once per (gamma, eps,
mollifier) by Monte Carlo, or shifted analytically between Gaussian
fields of the same log-correlated singularity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import statlab
from .chaos import ChaosMeasure, critical_gamma, gmc_critical, gmc_subcritical, smooth_field
from .errors import QualityError
from .fields import FieldEnsemble
from .grids import GridSpec
from .statlab import SlopeFit, StatReport

Array = np.ndarray

MOLLIFIER_PROFILES = ("quartic-bump",)
COUNTER_MODES = ("pooled", "per-point")


@dataclass(frozen=True)
class Mollifier:
    """Discrete mollifier on the grid: nonnegative window weights with
    support radius eps and exact unit discrete mass sum w h^d = 1."""

    profile: str
    eps: float
    half_width: int
    weights: Array
    grid: GridSpec

    @property
    def key(self) -> str:
        return f"{self.profile}@{self.eps:.12g}"


def build_mollifier(grid: GridSpec, eps: float,
                    profile: str = "quartic-bump") -> Mollifier:
    if profile not in MOLLIFIER_PROFILES:
        raise ValueError(f"unknown mollifier profile {profile!r}")
    if not 0 < eps <= grid.margin + 1e-12:
        raise ValueError(
            f"mollifier scale must lie in (0, margin={grid.margin}], got {eps}"
        )
    h = grid.h
    k = max(int(np.ceil(eps / h)) - 1, 0)
    offsets = np.arange(-k, k + 1) * h
    if grid.d == 1:
        t2 = (offsets / eps) ** 2
    else:
        t2 = (offsets[:, None] ** 2 + offsets[None, :] ** 2) / eps**2
    raw = np.where(t2 < 1.0, (1.0 - np.minimum(t2, 1.0)) ** 2, 0.0)
    total = raw.sum() * grid.cell_volume
    if total <= 0:
        raise ValueError(f"mollifier support resolves no grid cell at eps={eps}")
    weights = raw / total
    weights.setflags(write=False)
    return Mollifier(profile=profile, eps=float(eps), half_width=k,
                     weights=weights, grid=grid)


def mollifier_from_key(grid: GridSpec, key: str) -> Mollifier:
    profile, _, eps = key.rpartition("@")
    return build_mollifier(grid, float(eps), profile)


@dataclass(frozen=True)
class TestFunction:
    """Smooth bump supported strictly inside the inner region."""

    grid: GridSpec
    center: tuple[float, ...]
    radius: float
    values: Array

    def pair_with(self, field: Array) -> Array:
        """<field, psi> h^d per replica for grid-shaped field batches."""
        axes = tuple(range(1, field.ndim))
        return (field * self.values).sum(axis=axes) * self.grid.cell_volume


def build_test_function(grid: GridSpec, center=None, radius: float | None = None) -> TestFunction:
    lo = grid.margin
    hi = grid.length - grid.margin
    if center is None:
        center = (0.5 * grid.length,) * grid.d
    center = tuple(float(c) for c in np.atleast_1d(center))
    if len(center) != grid.d:
        raise ValueError(f"center must have {grid.d} coordinates")
    if radius is None:
        radius = 0.9 * min(min(c - lo, hi - c) for c in center)
    radius = float(radius)
    if radius <= 0:
        raise ValueError("test function radius must be positive")
    for c in center:
        if c - radius < lo - 1e-12 or c + radius > hi + 1e-12:
            raise ValueError(
                "test function support must stay inside the inner region "
                f"[{lo}, {hi}]"
            )
    pts = grid.points()
    t2 = np.sum((pts - np.asarray(center)) ** 2, axis=1) / radius**2
    vals = np.zeros(len(pts))
    inside = t2 < 1.0
    vals[inside] = np.exp(1.0 - 1.0 / (1.0 - t2[inside]))
    vals = vals.reshape(grid.shape)
    vals.setflags(write=False)
    return TestFunction(grid=grid, center=center, radius=radius, values=vals)


def log_smoothed_field(nu: ChaosMeasure, gamma: float, mollifier: Mollifier) -> Array:
    """A_eps(x) = (1/gamma) log (nu * eta_eps)(x) on the inner grid, (R, *inner)."""
    if not gamma > 0:
        raise ValueError(f"log estimator needs gamma > 0, got {gamma}")
    smoothed = smooth_field(nu, mollifier)
    return np.log(smoothed) / gamma


@dataclass(frozen=True)
class CounterTerm:
    """Centering constant for the reconstruction at one (gamma, eps, mollifier).

    mode "pooled" stores one scalar (stationary fields); "per-point"
    stores a value per inner grid point.
    """

    gamma: float
    eps: float
    mollifier_key: str
    mode: str
    values: Array
    se: Array
    n_replicas: int

    def table(self, grid: GridSpec) -> Array:
        inner = grid.inner_axis().shape[0]
        shape = (inner,) * grid.d
        if self.mode == "pooled":
            return np.full(shape, float(self.values))
        if self.values.shape != shape:
            raise ValueError(
                f"counter table shape {self.values.shape} does not match the "
                f"inner grid {shape}"
            )
        return self.values


def estimate_counter_term(nu: ChaosMeasure, gamma: float, mollifier: Mollifier,
                          mode: str = "pooled", se_cap: float = 0.05,
                          min_replicas: int = 100) -> CounterTerm:
    """Monte Carlo counter term: the replica mean of the log-smoothed field.

    Pooled mode averages over inner grid points as well, which is the
    exact mean for stationary fields and shrinks the SE by the spatial
    correlation-adjusted factor.
    """
    if mode not in COUNTER_MODES:
        raise ValueError(f"counter mode must be one of {COUNTER_MODES}")
    if nu.n_replicas < min_replicas:
        raise ValueError(
            f"counter estimation needs at least {min_replicas} replicas, "
            f"got {nu.n_replicas}"
        )
    a = log_smoothed_field(nu, gamma, mollifier)
    r = a.shape[0]
    if mode == "pooled":
        per_rep = a.reshape(r, -1).mean(axis=1)
        values = np.asarray(per_rep.mean())
        se = np.asarray(per_rep.std(ddof=1) / np.sqrt(r))
        worst = float(se)
    else:
        values = a.mean(axis=0)
        se = a.std(axis=0, ddof=1) / np.sqrt(r)
        worst = float(se.max())
    if worst > se_cap:
        raise QualityError(
            f"counter term SE {worst:.4f} exceeds cap {se_cap}; "
            "increase replicas"
        )
    return CounterTerm(gamma=float(gamma), eps=mollifier.eps,
                       mollifier_key=mollifier.key, mode=mode,
                       values=values, se=se, n_replicas=r)


def gaussian_shift_counter(counter: CounterTerm, gamma: float,
                           g_source, g_target) -> CounterTerm:
    """Move a counter term between Gaussian fields sharing the log(1/r) core.

    If both fields have covariance log(1/r) + g(r), the counter shifts by
    (gamma/2)(g_S(0) - g_G(0)) without a new Monte Carlo run.  The g
    values at coincident points must be supplied; refusing None keeps a
    silent wrong-field reuse from slipping through.
    """
    if g_source is None or g_target is None:
        raise ValueError(
            "g(0) values for both fields are required; estimate the counter "
            "directly when the remainder is unknown"
        )
    if abs(gamma - counter.gamma) > 1e-12:
        raise ValueError(
            f"shift gamma {gamma} does not match the counter gamma {counter.gamma}"
        )
    g_source = np.asarray(g_source, dtype=float)
    g_target = np.asarray(g_target, dtype=float)
    shift = 0.5 * gamma * (g_source - g_target)
    return CounterTerm(gamma=counter.gamma, eps=counter.eps,
                       mollifier_key=counter.mollifier_key, mode=counter.mode,
                       values=counter.values + shift, se=counter.se,
                       n_replicas=counter.n_replicas)


def reconstruct_pairing(nu: ChaosMeasure, counter: CounterTerm,
                        psi: TestFunction) -> Array:
    """<R_eps, psi> per replica, shape (R,)."""
    if abs(counter.gamma - nu.gamma) > 1e-12:
        raise ValueError(
            f"counter gamma {counter.gamma} does not match the measure "
            f"gamma {nu.gamma}"
        )
    grid = nu.grid
    mollifier = mollifier_from_key(grid, counter.mollifier_key)
    a = log_smoothed_field(nu, nu.gamma, mollifier)
    table = counter.table(grid)
    inner = grid.inner_slice()
    psi_inner = psi.values[inner] if grid.d == 1 else psi.values[inner, inner]
    resid = a - table
    axes = tuple(range(1, resid.ndim))
    return (resid * psi_inner).sum(axis=axes) * grid.cell_volume


@dataclass(frozen=True)
class ReconstructionResult:
    eps: float
    pairings: Array
    reference: Array
    l2: StatReport
    corr: float
    counter: CounterTerm


@dataclass(frozen=True)
class ConvergenceStudy:
    results: tuple[ReconstructionResult, ...]
    slope: SlopeFit | None

    def __iter__(self):
        return iter(self.results)

    def __len__(self) -> int:
        return len(self.results)


def convergence_study(ens: FieldEnsemble, gamma: float, psi: TestFunction,
                      recon_scales=None, ref_scale: float | None = None,
                      counter_mode: str = "pooled",
                      mollifier_profile: str = "quartic-bump",
                      se_cap: float = 0.05) -> ConvergenceStudy:
    """Reconstruction error against the reference field across scales.

    Each rung builds the chaos at scale eps from the ensemble, estimates
    its counter term, and pairs the reconstruction against the reference
    pairing <S_ref, psi> from the finest rung (default).  Critical chaos
    is selected automatically when gamma reaches sqrt(2d).
    """
    grid = ens.grid
    if ref_scale is None:
        ref_scale = ens.ladder.finest
    if recon_scales is None:
        recon_scales = [e for e in ens.ladder.scales
                        if e >= 4.0 * ref_scale - 1e-12 and e <= grid.margin + 1e-12]
    if not recon_scales:
        raise ValueError("no reconstruction scale is >= 4x the reference scale")
    for e in recon_scales:
        if e < 4.0 * ref_scale - 1e-12:
            raise ValueError(
                f"reconstruction scale {e} is too close to the reference "
                f"scale {ref_scale}; keep a factor of 4 between them"
            )
    gc = critical_gamma(grid.d)
    reference = psi.pair_with(ens.at_scale(ref_scale))

    results = []
    for eps in recon_scales:
        values = ens.at_scale(eps)
        var = np.log(1.0 / eps)
        if abs(gamma - gc) <= 1e-9:
            nu = gmc_critical(values, var, grid, eps)
        else:
            nu = gmc_subcritical(values, var, gamma, grid, eps=eps)
        mollifier = build_mollifier(grid, eps, mollifier_profile)
        counter = estimate_counter_term(nu, nu.gamma, mollifier,
                                        mode=counter_mode, se_cap=se_cap)
        pairings = reconstruct_pairing(nu, counter, psi)
        diff_sq = statlab.l2_error(pairings, reference)
        corr = float(np.corrcoef(pairings, reference)[0, 1])
        results.append(ReconstructionResult(
            eps=float(eps), pairings=pairings, reference=reference,
            l2=diff_sq, corr=corr, counter=counter,
        ))

    slope = None
    if len(results) >= 3:
        x = np.log([r.eps for r in results])
        y = np.log([max(r.l2.estimate, 1e-300) for r in results])
        slope = statlab.slope_fit(x, y)
    return ConvergenceStudy(results=tuple(results), slope=slope)
