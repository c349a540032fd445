"""Samplers for cut-off fields, the KL-expanded GFF, and smooth perturbations.

The cut-off field S_eps is sampled jointly along a scale ladder as a sum
of independent stationary layers: the coarsest rung carries kernel
K_{eps_0}, and each refinement carries the increment kernel
K_{eps_{j+1}} - K_{eps_j}. That layering realizes the martingale
structure of S_eps in the decreasing scale exactly, so joint covariances
across rungs follow the coarser-scale rule by construction.

Stationary layers are drawn by circulant embedding. The embedding period
is chosen so large that no wrap-around ever lands inside the kernel
support, which makes the window covariance exactly the target kernel and
guarantees a nonnegative embedding spectrum up to rounding; spectra
negative beyond the 1e-10 nugget trigger a dense Cholesky fallback,
recorded on the ensemble for the run manifest.

Replica r always draws from a fresh generator seeded with
(rng_seed, r), so its values are a pure function of that pair and
independent of how replicas are scheduled across workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import QualityError
from .grids import GridSpec, ScaleLadder
from .seedcov import SeedCovariance, cutoff_covariance, increment_kernel

Array = np.ndarray

NUGGET = 1e-10


def replica_rng(rng_seed: int, replica: int) -> np.random.Generator:
    """The canonical per-replica generator; all samplers route through it."""
    return np.random.default_rng([rng_seed, replica])


@dataclass(frozen=True)
class FieldEnsemble:
    """Joint samples of the cut-off field at every ladder rung.

    values has shape (R, len(ladder), n) for d=1 and
    (R, len(ladder), n, n) for d=2.
    """

    grid: GridSpec
    ladder: ScaleLadder
    seed: SeedCovariance
    values: Array
    rng_seed: int
    scheme: str
    notes: tuple[str, ...] = ()

    @property
    def n_replicas(self) -> int:
        return self.values.shape[0]

    def at_scale(self, eps: float) -> Array:
        """Field values S_eps for every replica, shape (R, *spatial)."""
        return self.values[:, self.ladder.index_of(eps)]

    def flat_at_scale(self, eps: float) -> Array:
        """Same, flattened to (R, n**d) in row-major point order."""
        return self.at_scale(eps).reshape(self.n_replicas, -1)


def _layer_kernels(seed: SeedCovariance, ladder: ScaleLadder):
    """Radial kernel callables for the base layer and each refinement."""
    kernels = [lambda r, e=ladder.scales[0]: cutoff_covariance(seed, e, r)]
    for coarse, fine in zip(ladder.scales, ladder.scales[1:]):
        kernels.append(
            lambda r, a=coarse, b=fine: increment_kernel(seed, a, b, r)
        )
    return kernels


def _embedding_size(grid: GridSpec) -> int:
    # period large enough that min-wrap distances never re-enter the
    # kernel support (radius 1 length unit = ceil(1/h) grid steps)
    support = int(np.ceil(1.0 / grid.h)) + 1
    need = max(grid.n - 1 + support, 2 * support, 2 * grid.n)
    return int(2 ** np.ceil(np.log2(need)))


def _wrap_distance_grid(m: int, h: float, d: int) -> Array:
    idx = np.minimum(np.arange(m), m - np.arange(m)).astype(float)
    if d == 1:
        return idx * h
    return np.hypot(idx[:, None], idx[None, :]) * h


def _circulant_spectrum(kernel, grid: GridSpec, m: int) -> tuple[Array | None, str]:
    """Embedding eigenvalues, or None with a note when not PSD enough."""
    dist = _wrap_distance_grid(m, grid.h, grid.d)
    row = kernel(dist)
    lam = np.fft.fftn(row)
    if np.abs(lam.imag).max() > 1e-8 * max(np.abs(lam.real).max(), 1.0):
        return None, "circulant spectrum not real"
    lam = lam.real
    floor = -NUGGET * lam.max()
    if lam.min() < floor:
        return None, f"circulant spectrum min {lam.min():.3e} below nugget"
    return np.maximum(lam, 0.0), ""


def _cholesky_factor(kernel, grid: GridSpec) -> tuple[Array, str]:
    pts = grid.points()
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    cov = kernel(dist)
    try:
        return np.linalg.cholesky(cov), ""
    except np.linalg.LinAlgError:
        pass
    bumped = cov + NUGGET * np.eye(cov.shape[0])
    try:
        factor = np.linalg.cholesky(bumped)
    except np.linalg.LinAlgError as exc:
        raise QualityError(
            f"covariance not positive definite even with {NUGGET} nugget"
        ) from exc
    return factor, f"dense cholesky needed a {NUGGET} diagonal nugget"


class _LayerSampler:
    """Precomputed per-layer factors, shared across replicas and workers."""

    def __init__(self, grid: GridSpec, spectra: list, factors: list, m: int):
        self.grid = grid
        self.spectra = spectra
        self.factors = factors
        self.m = m

    def draw_layer(self, j: int, rng: np.random.Generator) -> Array:
        grid = self.grid
        lam = self.spectra[j]
        if lam is None:
            z = rng.standard_normal(grid.n**grid.d)
            return (self.factors[j] @ z).reshape(grid.shape)
        m = self.m
        shape = (m,) * grid.d
        z = rng.standard_normal(2 * m**grid.d)
        half = m**grid.d
        zc = (z[:half] + 1j * z[half:]).reshape(shape)
        field = np.fft.fftn(np.sqrt(lam) * zc).real / np.sqrt(m**grid.d)
        return field[(slice(0, grid.n),) * grid.d]

    def draw_replica(self, replica: int, rng_seed: int, n_layers: int) -> Array:
        rng = replica_rng(rng_seed, replica)
        out = np.empty((n_layers, *self.grid.shape))
        acc = np.zeros(self.grid.shape)
        for j in range(n_layers):
            acc = acc + self.draw_layer(j, rng)
            out[j] = acc
        return out


def _sample_range(sampler: _LayerSampler, rng_seed: int, n_layers: int,
                  replicas: range) -> Array:
    out = np.empty((len(replicas), n_layers, *sampler.grid.shape))
    for i, r in enumerate(replicas):
        out[i] = sampler.draw_replica(r, rng_seed, n_layers)
    return out


def sample_cutoff_ensemble(
    grid: GridSpec,
    seed_cov: SeedCovariance,
    ladder: ScaleLadder,
    n_replicas: int,
    rng_seed: int,
    scheme: str = "circulant-layers",
    jobs: int = 1,
) -> FieldEnsemble:
    """Draw R joint replicas of the cut-off field at every ladder rung.

    scheme "circulant-layers" uses FFT embedding per stationary layer
    with automatic dense-Cholesky fallback; scheme "cholesky" forces the
    dense path. Fallbacks and nuggets are recorded in notes.
    """
    if seed_cov.d != grid.d:
        raise ValueError(f"seed covariance is d={seed_cov.d}, grid is d={grid.d}")
    if n_replicas < 1:
        raise ValueError("need at least one replica")
    if scheme not in ("circulant-layers", "cholesky"):
        raise ValueError(f"unknown scheme {scheme!r}")
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    ladder.require_resolvable(grid)

    kernels = _layer_kernels(seed_cov, ladder)
    m = _embedding_size(grid)
    spectra: list = []
    factors: list = []
    notes: list[str] = []
    for j, kernel in enumerate(kernels):
        lam = None
        if scheme == "circulant-layers":
            lam, why = _circulant_spectrum(kernel, grid, m)
            if lam is None:
                notes.append(f"layer {j}: {why}; dense cholesky fallback")
        spectra.append(lam)
        if lam is None:
            factor, note = _cholesky_factor(kernel, grid)
            if note:
                notes.append(f"layer {j}: {note}")
            factors.append(factor)
        else:
            factors.append(None)

    sampler = _LayerSampler(grid, spectra, factors, m)
    n_layers = len(ladder)
    if jobs == 1 or n_replicas < 2 * jobs:
        values = _sample_range(sampler, rng_seed, n_layers, range(n_replicas))
    else:
        bounds = np.linspace(0, n_replicas, jobs + 1).astype(int)
        chunks = [range(a, b) for a, b in zip(bounds, bounds[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(
                pool.map(
                    _sample_range,
                    [sampler] * len(chunks),
                    [rng_seed] * len(chunks),
                    [n_layers] * len(chunks),
                    chunks,
                )
            )
        values = np.concatenate(parts, axis=0)

    values.setflags(write=False)
    return FieldEnsemble(
        grid=grid,
        ladder=ladder,
        seed=seed_cov,
        values=values,
        rng_seed=rng_seed,
        scheme=scheme,
        notes=tuple(notes),
    )


def _offset_indices(grid: GridSpec, eps: float, u_grid) -> list:
    """Grid-step displacement per offset; rejects non-commensurable ones."""
    steps = []
    for u in np.atleast_1d(np.asarray(u_grid, dtype=float)).reshape(-1, grid.d if grid.d > 1 else 1):
        vec = u if grid.d > 1 else u[:1]
        if np.linalg.norm(vec) > 1.0 + 1e-12:
            raise ValueError(f"offset {vec} lies outside the closed unit ball")
        steps.append(tuple(grid.offset_steps(float(c), eps) for c in vec))
    return steps


def _shifted_values(field: Array, grid: GridSpec, x_index, step) -> Array:
    if grid.d == 1:
        i = int(x_index) + step[0]
        if not 0 <= i < grid.n:
            raise ValueError("shifted point leaves the grid")
        return field[:, i]
    i = int(x_index[0]) + step[0]
    j = int(x_index[1]) + step[1]
    if not (0 <= i < grid.n and 0 <= j < grid.n):
        raise ValueError("shifted point leaves the grid")
    return field[:, i, j]


def extract_Y(ens: FieldEnsemble, eps: float, x_index, u_grid) -> Array:
    """Zoom increments Y(u) = S_eps(x + eps*u) - S_eps(x), shape (R, len(u)).

    Offsets must land exactly on the grid; there is deliberately no
    interpolation, so covariance tests carry no interpolation bias.
    """
    field = ens.at_scale(eps)
    steps = _offset_indices(ens.grid, eps, u_grid)
    base = _shifted_values(field, ens.grid, x_index, (0,) * ens.grid.d)
    cols = [
        _shifted_values(field, ens.grid, x_index, s) - base for s in steps
    ]
    return np.column_stack(cols)


def extract_Z(ens: FieldEnsemble, eps: float, delta: float, x_index, u_grid) -> Array:
    """Refinement increments Z(u) = S_delta(x + eps*u) - S_eps(x + eps*u).

    Z is independent of S_eps and distributed like the cut-off field at
    scale delta/eps evaluated at the offsets u.
    """
    if not delta < eps:
        raise ValueError(f"need delta < eps, got delta={delta}, eps={eps}")
    coarse = ens.at_scale(eps)
    fine = ens.at_scale(delta)
    steps = _offset_indices(ens.grid, eps, u_grid)
    cols = [
        _shifted_values(fine, ens.grid, x_index, s)
        - _shifted_values(coarse, ens.grid, x_index, s)
        for s in steps
    ]
    return np.column_stack(cols)


@dataclass(frozen=True)
class KLFieldSpec:
    """Sine-basis KL truncation of the zero-boundary GFF on [0,1]^2.

    Eigenfunctions phi_{k,l}(x,y) = 2 sin(k pi x) sin(l pi y) with
    lambda_{k,l} = pi^2 (k^2 + l^2) / 2; the field weights each mode by
    lambda^{-1/2}, so lambda_{1,1} = pi^2.
    """

    n_modes: int

    def __post_init__(self) -> None:
        if self.n_modes < 1:
            raise ValueError("need at least one mode")

    def eigenvalue(self, k: int, l: int) -> float:
        return 0.5 * np.pi**2 * (k**2 + l**2)

    def eigenvalues(self) -> Array:
        k = np.arange(1, self.n_modes + 1)
        return 0.5 * np.pi**2 * (k[:, None] ** 2 + k[None, :] ** 2)


def sample_gff_kl(
    spec: KLFieldSpec, grid: GridSpec, n_replicas: int, rng_seed: int
) -> tuple[Array, Array]:
    """KL-truncated GFF replicas plus the exact truncated variance table.

    Returns (values, variance) with values of shape (R, n, n) and
    variance the analytic sigma_N^2(x) on the same grid, the table that
    chaos normalization must use for this field.
    """
    if grid.d != 2 or abs(grid.length - 1.0) > 1e-12:
        raise ValueError("KL sampling is defined on the unit square grid")
    k = np.arange(1, spec.n_modes + 1)
    sin_tab = np.sin(np.pi * k[:, None] * grid.axis[None, :])  # (N, n)
    inv_sqrt = 1.0 / np.sqrt(spec.eigenvalues())  # (N, N)
    variance = 4.0 * (sin_tab**2).T @ inv_sqrt**2 @ sin_tab**2
    values = np.empty((n_replicas, grid.n, grid.n))
    for r in range(n_replicas):
        rng = replica_rng(rng_seed, r)
        amp = rng.standard_normal((spec.n_modes, spec.n_modes))
        values[r] = 2.0 * sin_tab.T @ (amp * inv_sqrt) @ sin_tab
    values.setflags(write=False)
    variance.setflags(write=False)
    return values, variance


@dataclass(frozen=True)
class HolderFieldSpec:
    """Finite random Fourier series with rapidly decaying coefficients.

    sigma_m = amplitude * m**-2, so realizations are smooth; with the
    default uniform[-1,1] coefficients every replica obeys the
    deterministic bound max|H| <= 2 * amplitude * sum(m**-2).
    The "gauss" option uses standard normal coefficients instead, for
    cases that need H to be genuinely Gaussian with known variance.
    """

    n_modes: int
    amplitude: float
    coeff: str = "uniform"

    def __post_init__(self) -> None:
        if self.n_modes < 1:
            raise ValueError("need at least one mode")
        if self.amplitude < 0:
            raise ValueError("amplitude must be nonnegative")
        if self.coeff not in ("uniform", "gauss"):
            raise ValueError(f"unknown coefficient family {self.coeff!r}")

    def sigma(self) -> Array:
        m = np.arange(1, self.n_modes + 1, dtype=float)
        return self.amplitude * m**-2

    def sup_bound(self) -> float:
        """Deterministic per-replica bound; only the uniform family has one."""
        if self.coeff != "uniform":
            raise ValueError("only uniform coefficients give a deterministic bound")
        return 2.0 * float(self.sigma().sum())

    def variance(self) -> float:
        """Pointwise Var H(x), the same at every x by phase averaging."""
        s2 = float((self.sigma() ** 2).sum())
        return s2 / 3.0 if self.coeff == "uniform" else s2


def sample_holder_field(
    spec: HolderFieldSpec, grid: GridSpec, n_replicas: int, rng_seed: int
) -> Array:
    """Replicas of the smooth perturbation field on a d=1 grid, (R, n)."""
    if grid.d != 1:
        raise ValueError("the perturbation field is one-dimensional")
    m = np.arange(1, spec.n_modes + 1, dtype=float)
    phases = 2.0 * np.pi * np.outer(m, grid.axis) / grid.length  # (M, n)
    cos_tab, sin_tab = np.cos(phases), np.sin(phases)
    sigma = spec.sigma()
    out = np.empty((n_replicas, grid.n))
    for r in range(n_replicas):
        rng = replica_rng(rng_seed, r)
        if spec.coeff == "uniform":
            coeffs = rng.uniform(-1.0, 1.0, size=(2, spec.n_modes))
        else:
            coeffs = rng.standard_normal((2, spec.n_modes))
        out[r] = (sigma * coeffs[0]) @ cos_tab + (sigma * coeffs[1]) @ sin_tab
    if spec.coeff == "uniform" and spec.amplitude > 0:
        bound = spec.sup_bound() * (1 + 1e-12)
        if np.abs(out).max() > bound:
            raise AssertionError("replica violated the deterministic sup bound")
    out.setflags(write=False)
    return out
