"""Figure rendering for CLI runs.

Each renderer writes one PNG next to the delimited output. matplotlib is
imported lazily with the Agg backend so headless runs and non-plotting
commands never touch a display.
"""

from __future__ import annotations

import os

import numpy as np

from . import models as mdl
from .discretize import Grid

__all__ = ["render_potentials", "render_sector_levels", "render_dirac_levels",
           "render_check_residuals"]


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def render_potentials(model: mdl.ModelSpec, grid: Grid, path: str) -> str:
    """Superpotential and both partner potentials, real and imaginary parts."""
    plt = _pyplot()
    x = grid.x
    w = np.atleast_1d(mdl.superpotential_value(model, x))
    u1 = np.atleast_1d(mdl.partner_potential(model, 1, x))
    u2 = np.atleast_1d(mdl.partner_potential(model, 2, x))
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.6), sharex=True)
    for ax, part, tag in ((axes[0], np.real, "Re"), (axes[1], np.imag, "Im")):
        ax.plot(x, part(w), label="W", lw=1.2)
        ax.plot(x, part(u1), label="U1", lw=1.2)
        ax.plot(x, part(u2), label="U2", lw=1.2)
        ax.set_xlabel("x")
        ax.set_title(f"{tag} part")
        ax.grid(alpha=0.3)
    axes[0].legend(fontsize=8)
    fig.suptitle(model.label(), fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def _level_plot(ax, numeric, analytic, title):
    for e in numeric:
        ax.hlines(e, 0.1, 0.45, color="C0", lw=1.6)
    if analytic:
        for e in analytic:
            ax.hlines(e, 0.55, 0.9, color="C3", lw=1.6, linestyles="--")
    ax.set_xlim(0, 1)
    ax.set_xticks([0.275, 0.725])
    ax.set_xticklabels(["numeric", "analytic"])
    ax.set_title(title, fontsize=9)
    ax.grid(axis="y", alpha=0.3)


def render_sector_levels(results, path: str) -> str:
    """Level diagrams for one or both sector spectra."""
    plt = _pyplot()
    results = list(results)
    fig, axes = plt.subplots(1, len(results), figsize=(4.0 * len(results), 4.2),
                             squeeze=False)
    for ax, res in zip(axes[0], results):
        _level_plot(ax, res.levels, res.analytic, f"sector {res.sector_index}")
        ax.set_ylabel("level")
    fig.suptitle(results[0].model_label, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_dirac_levels(result, path: str) -> str:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4.4, 4.6))
    analytic = None
    if result.analytic_positive is not None:
        analytic = list(result.analytic_positive) + list(result.analytic_negative)
    _level_plot(ax, result.levels, analytic, "Dirac levels")
    ax.set_ylabel("E")
    fig.suptitle(result.model_label, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_check_residuals(report, path: str) -> str:
    """Log-scale bar chart of identity-check residuals against tolerances."""
    plt = _pyplot()
    names = [c.name for c in report.checks]
    floor = 1e-17
    res = [max(c.residual, floor) for c in report.checks]
    tols = [c.tolerance for c in report.checks]
    colors = ["C0" if c.passed else "C3" for c in report.checks]
    fig, ax = plt.subplots(figsize=(max(5.0, 0.5 * len(names)), 4.0))
    pos = np.arange(len(names))
    ax.bar(pos, res, color=colors)
    finite = [(p, t) for p, t in zip(pos, tols) if np.isfinite(t)]
    if finite:
        ax.plot([p for p, _ in finite], [t for _, t in finite], "k_", ms=14,
                label="tolerance")
        ax.legend(fontsize=8)
    ax.set_yscale("log")
    ax.set_xticks(pos)
    ax.set_xticklabels(names, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("residual")
    ax.set_title(report.model_label, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
