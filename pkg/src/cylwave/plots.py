"""Figure rendering for the report path.

Every function takes data already computed elsewhere, draws one figure,
writes it to the given path, and closes it.  The Agg backend is forced
so report generation works in headless environments.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from numpy.typing import NDArray

from .analysis import BrezisLiebRow, SubadditivityReport, TrialRow
from .grid import Field

logger = logging.getLogger(__name__)

__all__ = [
    "save_field_figure",
    "save_trace_figure",
    "save_scaling_figure",
    "save_subadditivity_figure",
    "save_defect_figure",
]


def _finish(fig: plt.Figure, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    logger.debug("wrote figure %s", path)
    return path


def save_field_figure(u: Field, path: Path, title: str = "field") -> Path:
    """Render a field, as a radial profile or as a half plane heat map."""
    g = u.grid
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if g.spec.n_z == 1:
        ax.plot(g.r, u.values[:, 0], lw=1.2)
        ax.set_xlabel("r")
        ax.set_ylabel("u")
    else:
        mesh = ax.pcolormesh(g.z, g.r, u.values, shading="nearest", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label="u")
        ax.set_xlabel("z")
        ax.set_ylabel("r")
    ax.set_title(title)
    return _finish(fig, path)


def save_trace_figure(trace: NDArray[np.float64], path: Path) -> Path:
    """Energy and residual history of a solve, residual on a log axis."""
    fig, (ax_j, ax_r) = plt.subplots(2, 1, figsize=(6.0, 5.0), sharex=True)
    if trace.size:
        ax_j.plot(trace[:, 0], trace[:, 1], lw=1.0)
        ax_r.semilogy(trace[:, 0], trace[:, 2], lw=1.0)
    ax_j.set_ylabel("energy")
    ax_r.set_ylabel("residual")
    ax_r.set_xlabel("iteration")
    ax_j.set_title("descent trace")
    return _finish(fig, path)


def save_scaling_figure(rows: Sequence[TrialRow], path: Path) -> Path:
    """Trial energy split against the plateau radius on log axes."""
    radii = np.array([row.R for row in rows])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, values in (
        ("kinetic radial", [row.kinetic_radial for row in rows]),
        ("kinetic axial", [row.kinetic_axial for row in rows]),
        ("|nonlinear|", [abs(row.nonlinear) for row in rows]),
    ):
        vals = np.array(values)
        if np.all(vals > 0.0):
            ax.loglog(radii, vals, marker="o", ms=3.5, lw=1.0, label=label)
    ax.set_xlabel("plateau radius R")
    ax.set_ylabel("energy contribution")
    ax.legend(fontsize=8)
    ax.set_title("trial energy scaling")
    return _finish(fig, path)


def save_subadditivity_figure(report: SubadditivityReport, path: Path) -> Path:
    """Margins of the mass splitting inequality over the scanned mus."""
    mus = [row.mu for row in report.rows]
    margins = [row.margin for row in report.rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(mus, margins, marker="o", ms=4.0, lw=1.0, label="margin")
    ax.axhline(report.margin_floor, color="tab:red", lw=0.8, ls="--", label="floor")
    ax.set_xlabel("mu")
    ax.set_ylabel("I(mu) + I(comp) - I(rho)")
    ax.legend(fontsize=8)
    ax.set_title("strict subadditivity margins")
    return _finish(fig, path)


def save_defect_figure(rows: Sequence[BrezisLiebRow], path: Path) -> Path:
    """Splitting defect against bump separation."""
    seps = [row.separation for row in rows]
    defects = [abs(row.defect) for row in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(seps, defects, marker="s", ms=4.0, lw=1.0)
    ax.set_xlabel("separation")
    ax.set_ylabel("|splitting defect|")
    ax.set_yscale("symlog", linthresh=1e-16)
    ax.set_title("nonlinear splitting defect")
    return _finish(fig, path)
