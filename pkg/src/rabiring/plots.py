"""File-based figure rendering for the command-line reports.

All renderers write PNG files through the Agg backend; nothing is ever
shown interactively.  Figures are a visual companion to the delimited
output, they carry no data of their own.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_LABEL_ORDER = ("NP", "AFSR", "CSR-I", "CSR-II", "FSR", "UNKNOWN", "FAILED")


def render_phase_diagram(cells, path) -> None:
    """Raster of phase labels over the (theta, g1) plane."""
    thetas = sorted({c.theta for c in cells})
    g1s = sorted({c.g1 for c in cells})
    ti = {t: i for i, t in enumerate(thetas)}
    gi = {g: i for i, g in enumerate(g1s)}
    codes = np.full((len(g1s), len(thetas)), np.nan)
    amp = np.full((len(g1s), len(thetas)), np.nan)
    label_code = {name: i for i, name in enumerate(_LABEL_ORDER)}
    for c in cells:
        codes[gi[c.g1], ti[c.theta]] = label_code.get(c.label_text, len(_LABEL_ORDER))
        amp[gi[c.g1], ti[c.theta]] = c.a4
    fig, axes = plt.subplots(1, 2, figsize=(11, 4), constrained_layout=True)
    extent = (
        min(thetas) / np.pi,
        max(thetas) / np.pi,
        min(g1s),
        max(g1s),
    )
    im0 = axes[0].imshow(
        codes,
        origin="lower",
        aspect="auto",
        extent=extent,
        cmap=plt.get_cmap("viridis", len(_LABEL_ORDER)),
        vmin=-0.5,
        vmax=len(_LABEL_ORDER) - 0.5,
    )
    cbar = fig.colorbar(im0, ax=axes[0], ticks=range(len(_LABEL_ORDER)))
    cbar.ax.set_yticklabels(_LABEL_ORDER)
    axes[0].set_xlabel("theta / pi")
    axes[0].set_ylabel("g1")
    axes[0].set_title("phase label")
    im1 = axes[1].imshow(
        amp, origin="lower", aspect="auto", extent=extent, cmap="magma"
    )
    fig.colorbar(im1, ax=axes[1])
    axes[1].set_xlabel("theta / pi")
    axes[1].set_ylabel("g1")
    axes[1].set_title("order parameter A4")
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_current_sweep(points, path) -> None:
    """Ring and subring currents against the flux angle."""
    thetas = np.array([p.theta for p in points]) / np.pi
    fig, ax = plt.subplots(figsize=(7, 4), constrained_layout=True)
    ax.plot(thetas, [p.current for p in points], label="I", lw=1.5)
    ax.plot(thetas, [p.odd_subring for p in points], label="I135", lw=1.0)
    ax.plot(thetas, [p.even_subring for p in points], label="I246", lw=1.0, ls="--")
    ax.axhline(0.0, color="0.7", lw=0.5)
    ax.set_xlabel("theta / pi")
    ax.set_ylabel("current")
    ax.legend()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_scaling(curve_fits, path) -> None:
    """Log-log gap curves with their fitted power laws.

    ``curve_fits`` is a list of (curve, fit, label) triples.
    """
    fig, ax = plt.subplots(figsize=(6, 4.5), constrained_layout=True)
    for curve, fit, label in curve_fits:
        ax.loglog(
            curve.deltas,
            curve.eps1,
            "o",
            ms=4,
            label=f"{label} (gamma={fit.gamma:.3f})",
        )
        span = np.array([np.min(curve.deltas), np.max(curve.deltas)])
        ax.loglog(span, np.exp(fit.log_prefactor) * span ** fit.gamma, "-", lw=1)
    ax.set_xlabel("reduced coupling |g1/g1c - 1|")
    ax.set_ylabel("lowest excitation energy")
    ax.legend()
    fig.savefig(path, dpi=150)
    plt.close(fig)
