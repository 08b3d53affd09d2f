"""Static SVG figures for the pipeline outputs.

Pure-Figure matplotlib (no pyplot state); SVGs are written without date
metadata and with a fixed hash salt so identical inputs give identical
files.
"""

from __future__ import annotations

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .jsi import JsiDiagonal, JsiMap
from .resonances import ResonanceSet
from .spectra import SpectrumTrace

__all__ = [
    "plot_transmission",
    "plot_integrated_dispersion",
    "plot_jsi_diagonal",
    "plot_jsi_map",
]

_MAX_TRACE_POINTS = 20000


def _save(fig: Figure, path) -> None:
    with matplotlib.rc_context({"svg.hashsalt": "ringpairs"}):
        fig.savefig(path, format="svg", metadata={"Date": None})


def plot_transmission(
    trace: SpectrumTrace, rset: ResonanceSet | None = None, path=None
) -> None:
    """Transmission sweep with fitted dip centers overlaid."""
    wl, tr = trace.wavelength_nm, trace.transmission
    if wl.size > _MAX_TRACE_POINTS:
        stride = int(np.ceil(wl.size / _MAX_TRACE_POINTS))
        wl, tr = wl[::stride], tr[::stride]
    fig = Figure(figsize=(9, 3.2))
    ax = fig.add_subplot(111)
    ax.plot(wl, tr, lw=0.6, color="tab:blue")
    if rset is not None:
        centers = [d.center_wavelength for d in rset.dips]
        depths = [1.0 - d.depth for d in rset.dips]
        ax.plot(centers, depths, "v", ms=3, color="tab:red", label="fitted dips")
        ax.legend(loc="lower right", fontsize=8)
    ax.set_xlabel("wavelength (nm)")
    ax.set_ylabel("transmission")
    ax.set_title("device transmission")
    fig.tight_layout()
    _save(fig, path)


def plot_integrated_dispersion(
    dint: dict[int, float], fit_dint_hz=None, path=None
) -> None:
    """Integrated dispersion versus mode index (values in MHz)."""
    mus = np.array(sorted(dint))
    values = np.array([dint[int(m)] for m in mus]) / (2 * np.pi) / 1e6
    fig = Figure(figsize=(5.5, 3.6))
    ax = fig.add_subplot(111)
    ax.plot(mus, values, "o", ms=3, color="tab:blue", label="measured")
    if fit_dint_hz is not None:
        fit_mus, fit_vals = fit_dint_hz
        ax.plot(fit_mus, np.asarray(fit_vals) / 1e6, "-", color="tab:orange", label="fit")
        ax.legend(fontsize=8)
    ax.set_xlabel(r"mode index $\mu$")
    ax.set_ylabel(r"$D_{int}/2\pi$ (MHz)")
    ax.set_title("integrated dispersion")
    fig.tight_layout()
    _save(fig, path)


def plot_jsi_diagonal(
    diagonal: JsiDiagonal, path=None, measured: dict[int, float] | None = None
) -> None:
    """Predicted diagonal (peak-normalized), optionally with measured rates.

    Measured values are normalized to their own maximum for shape
    comparison on a twin axis-free plot.
    """
    norm = diagonal.normalized()
    mus = np.array(norm.mus)
    values = np.array([norm.entries[int(m)] for m in mus])
    fig = Figure(figsize=(6.5, 3.6))
    ax = fig.add_subplot(111)
    ax.plot(mus, values, "o-", ms=3, lw=0.8, color="tab:orange", label="predicted")
    if measured:
        m_mus = np.array(sorted(measured))
        m_vals = np.array([measured[int(m)] for m in m_mus], dtype=float)
        peak = m_vals.max()
        if peak > 0:
            m_vals = m_vals / peak
        ax.plot(m_mus, m_vals, "s", ms=3, color="tab:blue", label="measured")
    ax.set_xlabel(r"mode pair index $\mu$")
    ax.set_ylabel("normalized pair intensity")
    ax.set_yscale("log")
    ax.set_title("joint spectral intensity, diagonal")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_jsi_map(jmap: JsiMap, path=None) -> None:
    """Heatmap of the (signal, idler) intensity matrix."""
    fig = Figure(figsize=(4.8, 4.2))
    ax = fig.add_subplot(111)
    extent = (
        jmap.mus[0] - 0.5,
        jmap.mus[-1] + 0.5,
        jmap.mus[0] - 0.5,
        jmap.mus[-1] + 0.5,
    )
    im = ax.imshow(
        jmap.matrix,
        origin="lower",
        extent=extent,
        aspect="equal",
        cmap="viridis",
    )
    fig.colorbar(im, ax=ax, shrink=0.85, label="intensity")
    ax.set_xlabel(r"idler mode $\mu_i$")
    ax.set_ylabel(r"signal mode $\mu_s$")
    ax.set_title("joint spectral intensity map")
    fig.tight_layout()
    _save(fig, path)
