"""Optional SVG figures for the CLI.

matplotlib is imported lazily inside each function and every caller wraps
these in try/except: a broken or missing plotting stack must never fail a
numeric run.
"""

from __future__ import annotations

import numpy as np


def _axes():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    return plt, fig, ax


def _finish(plt, fig, ax, path, xlabel, ylabel):
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_spectrum(path, mode_indices, freq_hz, oracle_hz=None) -> None:
    plt, fig, ax = _axes()
    ax.plot(mode_indices, np.asarray(freq_hz) / 1e9, "o-", ms=3, label="closed form")
    if oracle_hz is not None:
        ax.plot(mode_indices, np.asarray(oracle_hz) / 1e9, "x", ms=4, label="eigensolve")
        ax.legend()
    _finish(plt, fig, ax, path, "mode index", "frequency [GHz]")


def plot_dispersion(path, peak_freq_hz, fit) -> None:
    plt, fig, ax = _axes()
    from .spectrum import closed_form_frequency

    peaks = np.sort(np.asarray(peak_freq_hz, dtype=float))
    k = fit.index_offset + np.arange(1, peaks.size + 1)
    ax.plot(k, peaks / 1e9, "o", ms=4, label="peaks")
    m_grid = np.linspace(1, fit.big_n - 1, 400)
    model = closed_form_frequency(fit.big_n, fit.omega_p, fit.omega_g, m_grid)
    ax.plot(m_grid, model / (2 * np.pi * 1e9), "-", lw=1, label="fit")
    if fit.predicted_missing_modes.size:
        miss = fit.predicted_missing_modes / (2 * np.pi * 1e9)
        ax.plot(np.arange(1, fit.index_offset + 1), miss, "*", ms=9,
                label="predicted missing")
    ax.legend()
    _finish(plt, fig, ax, path, "mode index", "frequency [GHz]")


def plot_s11(path, freq_hz, s11, fit) -> None:
    plt, fig, ax = _axes()
    from .extraction import s11_model

    data = np.asarray(s11, dtype=complex)
    w = 2 * np.pi * np.asarray(freq_hz, dtype=float)
    model = s11_model(w, fit.omega_0, fit.kappa_c, fit.kappa_i, fit.phi_0)
    ax.plot(data.real, data.imag, ".", ms=3, label="data")
    ax.plot(model.real, model.imag, "-", lw=1, label="fit")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend()
    _finish(plt, fig, ax, path, "Re S11", "Im S11")


def plot_dc(path, counts, ohms, slope) -> None:
    plt, fig, ax = _axes()
    counts = np.asarray(counts, dtype=float)
    ax.plot(counts, np.asarray(ohms) / 1e3, "o", ms=5, label="data")
    grid = np.linspace(0, counts.max() * 1.05, 50)
    ax.plot(grid, slope * grid / 1e3, "-", lw=1, label="through-origin fit")
    ax.legend()
    _finish(plt, fig, ax, path, "stack count", "resistance [kOhm]")
