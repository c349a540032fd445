"""Render figure jobs to image files.

Figures are built on plain `matplotlib.figure.Figure` objects (no
pyplot state) and saved with pinned metadata, so a job renders to the
same bytes every time.  Each builder returns the figure together with
the arrays it plotted, taken verbatim from the input files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .jobs import FigureJob
from .schemas import (CONVERGENCE_COLUMNS, GN_COLUMNS, THICKPOINT_COLUMNS,
                      SchemaError, load_field_dump, read_table)


def _band(style) -> float:
    band = float(style.get("band", 3.0))
    if band < 0:
        raise ValueError("style band must be >= 0")
    return band


def _build_gff_views(job: FigureJob):
    dump = load_field_dump(job.inputs[0])
    if dump.d != 2:
        raise SchemaError(
            f"{job.inputs[0]}: gff-views needs a d=2 dump, got d={dump.d}"
        )
    replica = job.style.get("replica", 0)
    if not (isinstance(replica, int) and 0 <= replica < dump.values.shape[0]):
        raise ValueError(
            f"style replica must lie in [0, {dump.values.shape[0]})"
        )
    cmap = str(job.style.get("cmap", "viridis"))
    field = np.asarray(dump.values[replica, 0])
    axis = dump.axis()
    xg, yg = np.meshgrid(axis, axis, indexing="ij")

    fig = Figure(figsize=(11.0, 4.6))
    ax_surf = fig.add_subplot(1, 2, 1, projection="3d")
    ax_surf.plot_surface(xg, yg, field, cmap=cmap, rcount=dump.n,
                         ccount=dump.n, linewidth=0, antialiased=False)
    ax_surf.view_init(elev=28, azim=-60)
    ax_surf.set_xlabel("x")
    ax_surf.set_ylabel("y")

    ax_flat = fig.add_subplot(1, 2, 2)
    filled = ax_flat.contourf(xg, yg, field, levels=24, cmap=cmap)
    ax_flat.set_aspect("equal")
    ax_flat.set_xlabel("x")
    ax_flat.set_ylabel("y")
    fig.colorbar(filled, ax=ax_flat, shrink=0.92)

    modes = dump.manifest.get("modes")
    default = (f"KL field, {modes} modes, replica {replica}"
               if modes else f"field dump, replica {replica}")
    fig.suptitle(str(job.style.get("title", default)))
    return fig, {"axis": axis, "field": field}


def _build_convergence(job: FigureJob):
    table = read_table(job.inputs[0], CONVERGENCE_COLUMNS)
    eps = table.floats("epsilon")
    err = table.floats("l2_error")
    se = table.floats("l2_se")
    band = _band(job.style)

    fig = Figure(figsize=(6.4, 4.8))
    ax = fig.add_subplot(1, 1, 1)
    if band > 0:
        ax.fill_between(eps, err - band * se, err + band * se,
                        alpha=0.25, linewidth=0,
                        label=f"{band:g} SE band")
    ax.plot(eps, err, marker="o", label="squared pairing error")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("scale")
    ax.set_ylabel("mean squared error")
    ax.legend()
    ax.set_title(str(job.style.get("title", "reconstruction convergence")))
    return fig, {"epsilon": eps, "l2_error": err, "l2_se": se}


def _build_thick_points(job: FigureJob):
    table = read_table(job.inputs[0], THICKPOINT_COLUMNS)
    eps = table.floats("epsilon_n")
    rel = table.floats("rel_l2_error")
    se = table.floats("se")
    band = _band(job.style)

    fig = Figure(figsize=(6.4, 4.8))
    ax = fig.add_subplot(1, 1, 1)
    ax.errorbar(eps, rel, yerr=band * se if band > 0 else None,
                marker="o", capsize=3, label="relative L2 error")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("threshold scale")
    ax.set_ylabel("relative error vs chaos")
    ax.legend()
    ax.set_title(str(job.style.get("title", "thick-point convergence")))
    return fig, {"epsilon_n": eps, "rel_l2_error": rel, "se": se}


def _build_gn_sequence(job: FigureJob):
    table = read_table(job.inputs[0], GN_COLUMNS)
    n = table.floats("N")
    g = table.floats("g_N")

    fig = Figure(figsize=(6.4, 4.8))
    ax = fig.add_subplot(1, 1, 1)
    ax.plot(n, g, marker=".", linewidth=1.0)
    ax.set_xscale("log")
    if bool(job.style.get("logy", False)):
        ax.set_yscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel("g_N")
    ax.set_title(str(job.style.get("title", "normalization ratio g_N")))
    return fig, {"N": n, "g_N": g}


_BUILDERS = {
    "gff-views": _build_gff_views,
    "convergence": _build_convergence,
    "thick-points": _build_thick_points,
    "gn-sequence": _build_gn_sequence,
}


def build_figure(job: FigureJob):
    """Validate the job and build its figure.

    Returns (figure, payload) where payload maps column names to the
    arrays handed to matplotlib, exactly as parsed from the inputs.
    """
    job = job.validated()
    return _BUILDERS[job.kind](job)


def render(job: FigureJob) -> Path:
    """Build the figure and write the image file."""
    fig, _ = build_figure(job)
    out = job.out_path
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix == ".svg":
        save_kwargs = {"metadata": {"Date": None}}
    else:
        save_kwargs = {"metadata": {"Software": "logchaos-figs"}}
    with matplotlib.rc_context({"svg.hashsalt": "logchaos-figs"}):
        fig.savefig(out, dpi=int(job.style.get("dpi", 150)), **save_kwargs)
    return out
