"""Experiment runner: every pipeline as a subcommand.

Configuration precedence is flags > config-file section > [common]
section > built-in defaults, with the LOGCHAOS_SEED environment
variable overriding the seed last (CI sweeps).  Rejected configurations
exit 2 before any output file is touched; numerical-quality failures
exit 3; anything unexpected exits 4.  All outputs for one run land in
one directory with one manifest.
"""

from __future__ import annotations

import argparse
import configparser
import os
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import chaos as chaoslib
from . import reconstruct as rec
from . import runio, scalelab, statlab
from .errors import QualityError
from .fields import sample_cutoff_ensemble, sample_gff_kl, sample_holder_field, HolderFieldSpec, KLFieldSpec
from .grids import GridSpec, ScaleLadder
from .seedcov import cutoff_covariance, make_seed_covariance

ENV_SEED = "LOGCHAOS_SEED"

# option tables: (name, parser, default, help)


def _floats(text):
    vals = [float(tok) for tok in re.split(r"[,;]", str(text)) if tok.strip()]
    if not vals:
        raise ValueError("empty scale list")
    return tuple(vals)


_COMMON = [
    ("out", str, "out", "output directory"),
    ("seed", int, 7, "base RNG seed"),
    ("jobs", int, 1, "worker processes for replica sampling"),
]

_GRID = [
    ("d", int, 1, "dimension (1 or 2)"),
    ("profile", str, "auto", "seed covariance profile (triangle, lens, auto)"),
    ("n", int, 128, "grid cells per axis"),
    ("length", float, 1.0, "domain side length"),
    ("margin", float, 0.125, "inner-region margin"),
]

_OPTIONS = {
    "simulate-field": _GRID + [
        ("eps0", float, 0.25, "coarsest cut-off scale"),
        ("levels", int, 5, "dyadic ladder depth"),
        ("scales", _floats, None, "explicit scale list (overrides eps0/levels)"),
        ("replicas", int, 100, "replica count"),
        ("scheme", str, "circulant-layers", "sampling scheme"),
    ] + _COMMON,
    "simulate-gff": [
        ("modes", int, 200, "KL modes per axis"),
        ("n", int, 64, "grid cells per axis"),
        ("replicas", int, 1, "replica count"),
    ] + _COMMON,
    "build-chaos": _GRID + [
        ("eps0", float, 0.25, "coarsest cut-off scale"),
        ("levels", int, 3, "dyadic ladder depth"),
        ("scales", _floats, None, "explicit scale list"),
        ("replicas", int, 200, "replica count"),
        ("gamma", float, 0.5, "chaos exponent"),
        ("variant", str, "subcritical", "subcritical, critical, option1 or option2"),
        ("holder-modes", int, 8, "perturbation Fourier modes (option1)"),
        ("holder-amplitude", float, 0.25, "perturbation amplitude (option1)"),
        ("holder-coeff", str, "gauss", "perturbation coefficient law (option1)"),
    ] + _COMMON,
    "estimate-counter": _GRID + [
        ("eps", float, 0.0625, "chaos and mollifier scale"),
        ("replicas", int, 800, "replica count"),
        ("gamma", float, 0.5, "chaos exponent"),
        ("mode", str, "pooled", "counter mode: pooled or per-point"),
        ("se-cap", float, 0.05, "maximum admissible counter SE"),
    ] + _COMMON,
    "reconstruct": _GRID + [
        ("eps0", float, 0.25, "coarsest cut-off scale"),
        ("levels", int, 6, "dyadic ladder depth"),
        ("scales", _floats, None, "explicit scale list"),
        ("replicas", int, 2000, "replica count"),
        ("gamma", float, 0.5, "chaos exponent"),
        ("ref-scale", float, None, "reference scale (default: finest rung)"),
        ("recon-scales", _floats, None, "reconstruction scales (default: all >= 4x reference)"),
        ("counter-mode", str, "pooled", "counter mode: pooled or per-point"),
        ("se-cap", float, 0.05, "maximum admissible counter SE"),
        ("psi-center", float, None, "test function center"),
        ("psi-radius", float, None, "test function radius"),
    ] + _COMMON,
    "thick-points": _GRID + [
        ("n", int, 512, "grid cells per axis"),
        ("gamma", float, 0.5, "thick-point exponent"),
        ("scales", _floats, (0.125, 0.0625, 0.03125, 0.015625, 0.0078125),
         "thick-point scales"),
        ("ref-scale", float, None, "chaos reference scale (default: finest/2)"),
        ("replicas", int, 4000, "replica count"),
        ("psi-center", float, None, "test function center"),
        ("psi-radius", float, None, "test function radius"),
    ] + _COMMON,
    "gamma-transfer": _GRID + [
        ("n", int, 512, "grid cells per axis"),
        ("gamma0", float, 0.4, "source chaos exponent"),
        ("gamma", float, 0.7, "target chaos exponent"),
        ("scales", _floats, (0.125, 0.03125, 0.0078125), "mollifier scales"),
        ("source-scale", float, None, "source cut-off scale (default: finest/2)"),
        ("replicas", int, 2000, "replica count"),
        ("psi-center", float, None, "test function center"),
        ("psi-radius", float, None, "test function radius"),
    ] + _COMMON,
    "zeta-gn": [
        ("gamma", float, 1.0, "exponent"),
        ("n-max", int, 400, "number of factors"),
    ] + _COMMON,
    "circle-gn": [
        ("gamma", float, 1.0, "exponent"),
        ("n-max", int, 10000, "number of factors"),
    ] + _COMMON,
    "covariance-audit": _GRID + [
        ("scales", _floats, (0.25, 0.0625, 0.015625), "audited scales"),
        ("replicas", int, 4000, "replica count"),
        ("pairs", int, 24, "sampled point pairs per scale"),
    ] + _COMMON,
}

def _merged(options):
    """Deduplicate an option table by name; the last entry wins, so a
    subcommand can override a shared default."""
    table = {}
    for entry in options:
        table[entry[0]] = entry
    return list(table.values())


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logchaos",
        description="log-correlated field and multiplicative chaos experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, options in _OPTIONS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="INI config file")
        p.add_argument("--dry-run", action="store_true",
                       help="validate and print the resolved plan, compute nothing")
        for opt, _parse, _default, help_text in _merged(options):
            p.add_argument(f"--{opt}", default=None, help=help_text)
    return parser


def _resolve(command: str, args: argparse.Namespace) -> dict:
    """flags > config section > [common] > defaults, then the env seed."""
    options = _OPTIONS[command]
    file_cfg: dict[str, str] = {}
    if args.config is not None:
        ini = configparser.ConfigParser()
        if not ini.read(args.config):
            raise ValueError(f"config: cannot read {args.config}")
        for section in ("common", command):
            if ini.has_section(section):
                file_cfg.update(ini.items(section))
    cfg = {}
    for opt, parse, default, _help in _merged(options):
        key = opt.replace("-", "_")
        raw = getattr(args, key)
        if raw is None:
            raw = file_cfg.get(opt, file_cfg.get(key))
        if raw is None:
            cfg[key] = default
            continue
        try:
            cfg[key] = parse(raw)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{command}.{opt}: {exc}") from exc
    if ENV_SEED in os.environ and "seed" in cfg:
        cfg["seed"] = int(os.environ[ENV_SEED])
    return cfg


def _echo(cfg: dict) -> dict:
    out = {}
    for key, value in sorted(cfg.items()):
        if isinstance(value, tuple):
            value = ";".join(runio.fmt(v) for v in value)
        out[f"config.{key}"] = value if value is not None else "none"
    return out


def _profile_for(cfg: dict) -> str:
    if cfg["profile"] == "auto":
        return "triangle" if cfg["d"] == 1 else "lens"
    return cfg["profile"]


def _grid_of(cfg: dict) -> GridSpec:
    return GridSpec(d=cfg["d"], n=cfg["n"], length=cfg.get("length", 1.0),
                    margin=cfg.get("margin", 0.125))


def _ladder_of(cfg: dict) -> ScaleLadder:
    if cfg.get("scales"):
        return ScaleLadder(tuple(sorted(cfg["scales"], reverse=True)))
    return ScaleLadder.dyadic(cfg["eps0"], cfg["levels"])


def _psi_center(cfg: dict, grid: GridSpec):
    c = cfg.get("psi_center")
    return None if c is None else (c,) * grid.d


def _sample(cfg: dict, grid: GridSpec, ladder: ScaleLadder):
    seed_cov = make_seed_covariance(grid.d, _profile_for(cfg))
    return sample_cutoff_ensemble(
        grid, seed_cov, ladder, cfg["replicas"], cfg["seed"],
        scheme=cfg.get("scheme", "circulant-layers"), jobs=cfg["jobs"],
    )


# ---------------------------------------------------------------------------
# subcommand handlers: validate(cfg) -> plan dict; run(cfg) -> None


def _run_simulate_field(cfg: dict, dry: bool) -> None:
    grid = _grid_of(cfg)
    ladder = _ladder_of(cfg)
    ladder.require_resolvable(grid)
    plan = _echo(cfg) | {"plan.scales": ";".join(runio.fmt(e) for e in ladder.scales)}
    if dry:
        _print_plan(plan)
        return
    t0 = time.perf_counter()
    ens = _sample(cfg, grid, ladder)
    runio.write_field_dump(Path(cfg["out"]), ens,
                           extra=plan | {"wall_time_s": time.perf_counter() - t0})


def _run_simulate_gff(cfg: dict, dry: bool) -> None:
    if cfg["modes"] < 1 or cfg["n"] < 4 or cfg["replicas"] < 1:
        raise ValueError("simulate-gff: modes >= 1, n >= 4, replicas >= 1 required")
    grid = GridSpec(d=2, n=cfg["n"])
    spec = KLFieldSpec(n_modes=cfg["modes"])
    plan = _echo(cfg)
    if dry:
        _print_plan(plan)
        return
    t0 = time.perf_counter()
    values, variance = sample_gff_kl(spec, grid, cfg["replicas"], cfg["seed"])
    out = Path(cfg["out"])
    runio.write_array_dump(out, values, plan | {
        "kind": "gff-kl-dump",
        "d": 2,
        "n": grid.n,
        "length": grid.length,
        "modes": spec.n_modes,
        "n_replicas": cfg["replicas"],
        "n_scales": 1,
        "rng_seed": cfg["seed"],
        "kl_eigenvalue_convention": "0.5*pi^2*(k^2+l^2)",
        "wall_time_s": time.perf_counter() - t0,
    })
    axis = grid.axis
    rows = []
    for i in range(grid.n):
        for j in range(grid.n):
            rows.append((i, j, axis[i], axis[j], variance[i, j]))
    runio.write_csv(out / "gff_variance.csv",
                    ["i", "j", "x", "y", "sigma2"], rows)


def _chaos_from_cfg(cfg: dict, grid: GridSpec, ens, eps: float):
    values = ens.at_scale(eps)
    var = np.log(1.0 / eps)
    variant = cfg["variant"]
    if variant == "subcritical":
        return chaoslib.gmc_subcritical(values, var, cfg["gamma"], grid, eps=eps)
    if variant == "critical":
        return chaoslib.gmc_critical(values, var, grid, eps)
    if variant == "option1":
        if grid.d != 1:
            raise ValueError("build-chaos: option1 perturbation is implemented for d=1")
        spec = HolderFieldSpec(n_modes=cfg["holder_modes"],
                               amplitude=cfg["holder_amplitude"],
                               coeff=cfg["holder_coeff"])
        h = sample_holder_field(spec, grid, cfg["replicas"], cfg["seed"] + 1)
        nu = chaoslib.gmc_subcritical(values, var, cfg["gamma"], grid, eps=eps)
        return chaoslib.chaos_option1(nu, h)
    if variant == "option2":
        table = chaoslib.NormalizerTable.closed_form(cfg["gamma"], var)
        return chaoslib.chaos_option2(values, table, grid, cfg["gamma"], eps=eps)
    raise ValueError(f"build-chaos: unknown variant {variant!r}")


def _run_build_chaos(cfg: dict, dry: bool) -> None:
    grid = _grid_of(cfg)
    ladder = _ladder_of(cfg)
    ladder.require_resolvable(grid)
    if cfg["variant"] not in chaoslib.VARIANTS:
        raise ValueError(f"build-chaos.variant: unknown variant {cfg['variant']!r}")
    eps = ladder.finest
    plan = _echo(cfg) | {"plan.chaos_scale": eps}
    if dry:
        _print_plan(plan)
        return
    t0 = time.perf_counter()
    ens = _sample(cfg, grid, ladder)
    nu = _chaos_from_cfg(cfg, grid, ens, eps)
    totals = nu.total_mass()
    rows = [(r, eps, nu.gamma, nu.variant, totals[r]) for r in range(len(totals))]
    out = Path(cfg["out"])
    runio.write_csv(out / "chaos_summary.csv",
                    ["replica", "epsilon", "gamma", "variant", "total_mass"], rows)
    runio.write_manifest(out / "manifest.txt", plan | {
        "version": runio.version_string(),
        "fallbacks": ";".join(ens.notes) if ens.notes else "none",
        "wall_time_s": time.perf_counter() - t0,
    })


def _run_estimate_counter(cfg: dict, dry: bool) -> None:
    grid = _grid_of(cfg)
    ladder = ScaleLadder((cfg["eps"],))
    ladder.require_resolvable(grid)
    if cfg["mode"] not in rec.COUNTER_MODES:
        raise ValueError(f"estimate-counter.mode: {cfg['mode']!r} not in {rec.COUNTER_MODES}")
    if not cfg["gamma"] > 0:
        raise ValueError("estimate-counter.gamma: must be positive")
    mollifier = rec.build_mollifier(grid, cfg["eps"])
    plan = _echo(cfg)
    if dry:
        _print_plan(plan)
        return
    t0 = time.perf_counter()
    ens = _sample(cfg, grid, ladder)
    eps = cfg["eps"]
    gamma = cfg["gamma"]
    gc = chaoslib.critical_gamma(grid.d)
    if abs(gamma - gc) <= 1e-9:
        nu = chaoslib.gmc_critical(ens.at_scale(eps), np.log(1 / eps), grid, eps)
    else:
        nu = chaoslib.gmc_subcritical(ens.at_scale(eps), np.log(1 / eps), gamma,
                                      grid, eps=eps)
    counter = rec.estimate_counter_term(nu, nu.gamma, mollifier, mode=cfg["mode"],
                                        se_cap=cfg["se_cap"])
    out = Path(cfg["out"])
    if cfg["mode"] == "pooled":
        rows = [(counter.gamma, counter.eps, counter.mode, counter.n_replicas,
                 float(counter.values), float(counter.se))]
        runio.write_csv(out / "counter.csv",
                        ["gamma", "epsilon", "mode", "n_replicas", "value", "se"],
                        rows)
    else:
        inner = grid.inner_axis()
        rows = []
        if grid.d == 1:
            for i, x in enumerate(inner):
                rows.append((i, x, counter.values[i], counter.se[i]))
            header = ["i", "x", "value", "se"]
        else:
            for i, x in enumerate(inner):
                for j, y in enumerate(inner):
                    rows.append((i, j, x, y, counter.values[i, j], counter.se[i, j]))
            header = ["i", "j", "x", "y", "value", "se"]
        runio.write_csv(out / "counter.csv", header, rows)
    runio.write_manifest(out / "manifest.txt", plan | {
        "version": runio.version_string(),
        "gamma": counter.gamma,
        "epsilon": counter.eps,
        "mollifier": counter.mollifier_key,
        "mode": counter.mode,
        "fallbacks": ";".join(ens.notes) if ens.notes else "none",
        "wall_time_s": time.perf_counter() - t0,
    })


def _run_reconstruct(cfg: dict, dry: bool) -> None:
    grid = _grid_of(cfg)
    ladder = _ladder_of(cfg)
    ladder.require_resolvable(grid)
    if not cfg["gamma"] > 0:
        raise ValueError("reconstruct.gamma: must be positive")
    plan = _echo(cfg)
    if dry:
        _print_plan(plan)
        return
    t0 = time.perf_counter()
    ens = _sample(cfg, grid, ladder)
    psi = rec.build_test_function(grid, center=_psi_center(cfg, grid),
                                  radius=cfg.get("psi_radius"))
    study = rec.convergence_study(
        ens, cfg["gamma"], psi,
        recon_scales=cfg.get("recon_scales"),
        ref_scale=cfg.get("ref_scale"),
        counter_mode=cfg["counter_mode"],
        se_cap=cfg["se_cap"],
    )
    rows = []
    for res in study:
        se_max = float(np.max(res.counter.se))
        rows.append((res.eps, len(res.pairings), res.l2.estimate, res.l2.se,
                     res.corr, res.counter.mode, se_max))
    out = Path(cfg["out"])
    runio.write_csv(out / "convergence.csv",
                    ["epsilon", "n_replicas", "l2_error", "l2_se", "corr",
                     "counter_mode", "counter_se_max"], rows)
    entries = plan | {
        "version": runio.version_string(),
        "fallbacks": ";".join(ens.notes) if ens.notes else "none",
        "wall_time_s": time.perf_counter() - t0,
    }
    if study.slope is not None:
        entries["loglog_slope"] = study.slope.slope
        entries["loglog_slope_se"] = study.slope.slope_se
    runio.write_manifest(out / "manifest.txt", entries)


def _run_thick_points(cfg: dict, dry: bool) -> None:
    grid = _grid_of(cfg)
    scales = tuple(sorted(cfg["scales"], reverse=True))
    ref = cfg.get("ref_scale") or min(scales) / 2.0
    ladder = ScaleLadder(tuple(sorted(set(scales) | {ref}, reverse=True)))
    ladder.require_resolvable(grid)
    if not 0 <= cfg["gamma"] < chaoslib.critical_gamma(grid.d):
        raise ValueError("thick-points.gamma: outside [0, sqrt(2d))")
    plan = _echo(cfg) | {"plan.ref_scale": ref}
    if dry:
        _print_plan(plan)
        return
    t0 = time.perf_counter()
    ens = _sample(cfg, grid, ladder)
    psi = rec.build_test_function(grid, center=_psi_center(cfg, grid),
                                  radius=cfg.get("psi_radius"))
    nu_ref = chaoslib.gmc_subcritical(ens.at_scale(ref), np.log(1 / ref),
                                      cfg["gamma"], grid, eps=ref)
    ref_vals = chaoslib.integrate(nu_ref, psi.values)
    rows = []
    for eps in scales:
        rho = scalelab.thick_point_measure(ens, eps, cfg["gamma"])
        vals = scalelab.integrate_masses(rho.masses, psi.values)
        rel = scalelab.relative_l2(vals, ref_vals)
        rows.append((eps, rel.n, rel.estimate, rel.se))
    out = Path(cfg["out"])
    runio.write_csv(out / "thickpoints.csv",
                    ["epsilon_n", "n_replicas", "rel_l2_error", "se"], rows)
    runio.write_manifest(out / "manifest.txt", plan | {
        "version": runio.version_string(),
        "fallbacks": ";".join(ens.notes) if ens.notes else "none",
        "wall_time_s": time.perf_counter() - t0,
    })


def _run_gamma_transfer(cfg: dict, dry: bool) -> None:
    grid = _grid_of(cfg)
    scales = tuple(sorted(cfg["scales"], reverse=True))
    src = cfg.get("source_scale") or min(scales) / 2.0
    ladder = ScaleLadder(tuple(sorted(set(scales) | {src}, reverse=True)))
    ladder.require_resolvable(grid)
    d = grid.d
    root_d = float(np.sqrt(d))
    gamma0, gamma = cfg["gamma0"], cfg["gamma"]
    if not (0 < gamma0 < root_d and 0 < gamma < root_d):
        raise ValueError(
            f"gamma-transfer: gamma0 and gamma must lie in (0, sqrt(d)) = "
            f"(0, {root_d:.4f}); got gamma0={gamma0}, gamma={gamma}"
        )
    if gamma * gamma0 >= 2.0 * d:
        raise ValueError(
            f"gamma-transfer: gamma*gamma0 = {gamma * gamma0:.4f} >= 2d "
            f"violates the moment guard q_c = 2d/gamma0^2"
        )
    for eps in scales:
        if eps > grid.margin + 1e-12:
            raise ValueError(
                f"gamma-transfer.scales: mollifier scale {eps} exceeds margin "
                f"{grid.margin}"
            )
    plan = _echo(cfg) | {"plan.source_scale": src}
    if dry:
        _print_plan(plan)
        return
    t0 = time.perf_counter()
    ens = _sample(cfg, grid, ladder)
    psi = rec.build_test_function(grid, center=_psi_center(cfg, grid),
                                  radius=cfg.get("psi_radius"))
    source = chaoslib.gmc_subcritical(ens.at_scale(src), np.log(1 / src),
                                      gamma0, grid, eps=src)
    target = chaoslib.gmc_subcritical(ens.at_scale(src), np.log(1 / src),
                                      gamma, grid, eps=src)
    inner = grid.inner_slice()
    psi_inner = psi.values[inner] if d == 1 else psi.values[inner, inner]
    target_vals = scalelab.integrate_masses(
        target.masses[(slice(None), inner) if d == 1 else (slice(None), inner, inner)],
        psi_inner,
    )
    rows = []
    for eps in scales:
        mollifier = rec.build_mollifier(grid, eps)
        tm = scalelab.gamma_transfer(source, gamma, mollifier)
        vals = scalelab.integrate_masses(tm.masses, psi_inner)
        rel = scalelab.relative_l2(vals, target_vals)
        rows.append((eps, gamma0, gamma, rel.estimate, rel.se))
    out = Path(cfg["out"])
    runio.write_csv(out / "transfer.csv",
                    ["epsilon", "gamma0", "gamma", "rel_l2_error", "se"], rows)
    runio.write_manifest(out / "manifest.txt", plan | {
        "version": runio.version_string(),
        "fallbacks": ";".join(ens.notes) if ens.notes else "none",
        "wall_time_s": time.perf_counter() - t0,
    })


def _run_zeta_gn(cfg: dict, dry: bool) -> None:
    if cfg["n_max"] < 1:
        raise ValueError("zeta-gn.n-max: must be >= 1")
    if not 0 < cfg["gamma"] < float(np.sqrt(2.0)):
        raise ValueError("zeta-gn.gamma: must lie in (0, sqrt(2))")
    plan = _echo(cfg)
    if dry:
        _print_plan(plan)
        return
    t0 = time.perf_counter()
    g = scalelab.zeta_gn_ratio(cfg["gamma"], cfg["n_max"])
    out = Path(cfg["out"])
    runio.write_csv(out / "zeta_gn.csv", ["N", "g_N"],
                    [(k + 1, g[k]) for k in range(len(g))])
    runio.write_manifest(out / "manifest.txt", plan | {
        "version": runio.version_string(),
        "wall_time_s": time.perf_counter() - t0,
    })


def _run_circle_gn(cfg: dict, dry: bool) -> None:
    if cfg["n_max"] < 2:
        raise ValueError("circle-gn.n-max: must be >= 2")
    if not cfg["gamma"] > 0:
        raise ValueError("circle-gn.gamma: must be positive")
    plan = _echo(cfg)
    if dry:
        _print_plan(plan)
        return
    t0 = time.perf_counter()
    g = scalelab.circle_counterexample_gn(cfg["gamma"], cfg["n_max"])
    out = Path(cfg["out"])
    runio.write_csv(out / "circle_gn.csv", ["N", "g_N"],
                    [(k + 2, g[k]) for k in range(len(g))])
    runio.write_manifest(out / "manifest.txt", plan | {
        "version": runio.version_string(),
        "wall_time_s": time.perf_counter() - t0,
    })


def _run_covariance_audit(cfg: dict, dry: bool) -> None:
    grid = _grid_of(cfg)
    scales = tuple(sorted(cfg["scales"], reverse=True))
    ladder = ScaleLadder(scales)
    ladder.require_resolvable(grid)
    if cfg["pairs"] < 1:
        raise ValueError("covariance-audit.pairs: must be >= 1")
    if cfg["replicas"] < 30:
        raise ValueError("covariance-audit.replicas: need >= 30 for jackknife SEs")
    plan = _echo(cfg)
    if dry:
        _print_plan(plan)
        return
    t0 = time.perf_counter()
    ens = _sample(cfg, grid, ladder)
    seed_cov = make_seed_covariance(grid.d, _profile_for(cfg))
    pts = grid.points()
    npts = pts.shape[0]
    picker = np.random.default_rng([cfg["seed"], 999_983])
    var_ix = picker.choice(npts, size=min(cfg["pairs"], npts), replace=False)
    pair_ix = picker.integers(0, npts, size=(cfg["pairs"], 2))
    rows = []
    worst = 0.0
    for eps in scales:
        flat = ens.flat_at_scale(eps)
        var_pairs = [(int(i), int(i)) for i in var_ix]
        cov_pairs = [(int(i), int(j)) for i, j in pair_ix]
        stats = statlab.empirical_cov(flat, var_pairs + cov_pairs)
        for (i, j), (est, se) in zip(var_pairs + cov_pairs, stats):
            r = float(np.linalg.norm(pts[i] - pts[j]))
            oracle = float(cutoff_covariance(seed_cov, eps, r))
            z = (est - oracle) / se if se > 0 else 0.0
            worst = max(worst, abs(z))
            kind = "var" if i == j else "cov"
            rows.append((eps, kind, i, j, r, est, se, oracle, z))
    out = Path(cfg["out"])
    runio.write_csv(out / "audit.csv",
                    ["epsilon", "kind", "i", "j", "r", "estimate", "se",
                     "oracle", "z"], rows)
    runio.write_manifest(out / "manifest.txt", plan | {
        "version": runio.version_string(),
        "max_abs_z": worst,
        "all_within_3se": worst <= 3.0,
        "fallbacks": ";".join(ens.notes) if ens.notes else "none",
        "wall_time_s": time.perf_counter() - t0,
    })


_HANDLERS = {
    "simulate-field": _run_simulate_field,
    "simulate-gff": _run_simulate_gff,
    "build-chaos": _run_build_chaos,
    "estimate-counter": _run_estimate_counter,
    "reconstruct": _run_reconstruct,
    "thick-points": _run_thick_points,
    "gamma-transfer": _run_gamma_transfer,
    "zeta-gn": _run_zeta_gn,
    "circle-gn": _run_circle_gn,
    "covariance-audit": _run_covariance_audit,
}


def _print_plan(plan: dict) -> None:
    for key, value in plan.items():
        print(f"{key} = {runio.fmt(value)}")


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args.command, args)
        _HANDLERS[args.command](cfg, args.dry_run)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except QualityError as exc:
        print(f"numerical quality error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
