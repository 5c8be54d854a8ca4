"""Figure builders: one renderer per bundled experiment output.

Deterministic by construction: the Agg backend, a fixed style, constant
PNG metadata, and inputs fully determining every artist.  Each builder
takes the artifact directory and returns a matplotlib Figure; `render`
writes it to the requested path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .tables import (
    FIT_SWEEP_COLUMNS,
    GATE_TRACE_COLUMNS,
    NOISE_COLUMNS,
    ROBUSTNESS_COLUMNS,
    SPECTRUM_COLUMNS,
    SchemaError,
    load_table,
)

_STYLE = {
    "figure.dpi": 110,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
    "svg.hashsalt": "figrender",
}

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


@dataclass
class PlotJob:
    """One rendering request: figure id, artifact directory, output."""

    figure: str
    in_dir: Path
    out_file: Path
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        self.in_dir = Path(self.in_dir)
        self.out_file = Path(self.out_file)


def _gate_traces(in_dir: Path, pattern: str) -> list[tuple[str, dict]]:
    files = sorted(p for p in in_dir.glob(pattern) if "waveform" not in p.name)
    if not files:
        raise SchemaError(f"no artifacts matching {pattern!r} in {in_dir}")
    return [(p.stem, load_table(p, GATE_TRACE_COLUMNS)) for p in files]


def fig2(in_dir: Path) -> plt.Figure:
    t = load_table(in_dir / "fit_effective_sweep.csv", FIT_SWEEP_COLUMNS)
    fig, axes = plt.subplots(1, 3, figsize=(10.5, 3.2))
    t23s = np.unique(t["t_T23_GHz"])
    ref = t["t_T23_GHz"] == t23s.max()
    order = np.argsort(t["detuning_GHz"][ref])
    eps = t["detuning_GHz"][ref][order]
    for name, label, color in (
        ("omega_D_GHz", "qubit D", _COLORS[0]),
        ("omega_T_GHz", "qubit T", _COLORS[1]),
        ("omega_3_GHz", "qubit 3", _COLORS[2]),
    ):
        axes[0].plot(eps, t[f"{name}_analytic"][ref][order], color=color, label=label)
        axes[0].plot(eps, t[f"{name}_fit"][ref][order], "o", ms=3.5, color=color)
    axes[0].set_ylabel("frequency (GHz)")
    axes[0].legend(fontsize=7)
    axes[1].plot(eps, 1e6 * np.abs(t["J_r_GHz_analytic"][ref][order]), color=_COLORS[0])
    axes[1].plot(eps, 1e6 * np.abs(t["J_r_GHz_fit"][ref][order]), "o", ms=3.5, color=_COLORS[0])
    axes[1].set_ylabel("|J_r| (kHz)")
    axes[1].set_yscale("log")
    for i, t23 in enumerate(t23s):
        sel = t["t_T23_GHz"] == t23
        o = np.argsort(t["detuning_GHz"][sel])
        axes[2].plot(
            t["detuning_GHz"][sel][o],
            1e3 * np.abs(t["J_e_GHz_analytic"][sel][o]),
            color=_COLORS[i % len(_COLORS)],
            label=f"t23 = {t23:g} GHz",
        )
        axes[2].plot(
            t["detuning_GHz"][sel][o],
            1e3 * np.abs(t["J_e_GHz_fit"][sel][o]),
            "o",
            ms=3.5,
            color=_COLORS[i % len(_COLORS)],
        )
    axes[2].set_ylabel("|J_e| (MHz)")
    axes[2].legend(fontsize=7)
    for ax in axes:
        ax.set_xlabel("detuning (GHz)")
    fig.suptitle("effective parameters: fit (dots) vs model (lines)")
    return fig


def _trace_figure(traces, title, log=True):
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    for i, (label, t) in enumerate(traces):
        ax.plot(t["time_ns"], t["infidelity"], color=_COLORS[i % len(_COLORS)],
                label=label)
    if log:
        ax.set_yscale("log")
    ax.set_xlabel("time (ns)")
    ax.set_ylabel("gate infidelity")
    ax.legend(fontsize=7)
    ax.set_title(title)
    return fig


def fig3a(in_dir: Path) -> plt.Figure:
    traces = _gate_traces(in_dir, "cz_hann_tg100*.csv")
    return _trace_figure(traces, "conditional-phase gate, 100 ns window pulse")


def fig3c(in_dir: Path) -> plt.Figure:
    traces = _gate_traces(in_dir, "cz_*tg52.98*.csv")
    return _trace_figure(traces, "synchronized gate time: pulse-shape comparison")


def fig3d(in_dir: Path) -> plt.Figure:
    traces = _gate_traces(in_dir, "cz_*tg100*.csv")
    return _trace_figure(traces, "100 ns gate time: pulse-shape comparison")


def fig3e(in_dir: Path) -> plt.Figure:
    t = load_table(in_dir / "pulse_spectrum.csv", SPECTRUM_COLUMNS)
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    ax.semilogy(t["tg_wq_over_2pi"], t["Pe_rect"], color=_COLORS[0], label="rectangular")
    ax.semilogy(t["tg_wq_over_2pi"], t["Pe_hann"], color=_COLORS[1], label="first-order window")
    ax.set_ylim(1e-12, 2.0)
    ax.set_xlabel(r"$t_g \omega_q / 2\pi$")
    ax.set_ylabel("normalized non-adiabatic error")
    ax.legend(fontsize=7)
    ax.set_title("pulse error spectra")
    return fig


def fig4a(in_dir: Path) -> plt.Figure:
    traces = _gate_traces(in_dir, "cnot_t23_*.csv")
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    for i, (label, t) in enumerate(traces):
        ax.plot(t["time_ns"], t["fidelity"], color=_COLORS[i % len(_COLORS)], label=label)
    ax.set_xlabel("time (ns)")
    ax.set_ylabel("gate fidelity")
    ax.set_ylim(0.0, 1.02)
    ax.legend(fontsize=7)
    ax.set_title("cross-resonance entangling gate")
    return fig


def fig4b(in_dir: Path) -> plt.Figure:
    t = load_table(in_dir / "cnot_robustness.csv", ROBUSTNESS_COLUMNS)
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    o = np.argsort(t["omega_d_GHz"])
    ax.plot(t["omega_d_GHz"][o], t["best_fidelity"][o], "o-", color=_COLORS[0], ms=3.5)
    ax.set_xlabel("drive frequency (GHz)")
    ax.set_ylabel("best gate fidelity")
    ax.set_title("drive-frequency robustness")
    return fig


def fig5(in_dir: Path) -> plt.Figure:
    t = load_table(in_dir / "noise_sweep.csv", NOISE_COLUMNS)
    fig, ax = plt.subplots(figsize=(4.8, 3.4))
    for i, t23 in enumerate(np.unique(t["t_T23_GHz"])):
        sel = t["t_T23_GHz"] == t23
        o = np.argsort(t["sigma_GHz"][sel])
        ax.errorbar(
            t["sigma_GHz"][sel][o],
            t["mean_infidelity"][sel][o],
            yerr=t["std_infidelity"][sel][o],
            fmt="o-",
            ms=3.5,
            capsize=2.5,
            color=_COLORS[i % len(_COLORS)],
            label=f"t23 = {t23:g} GHz",
        )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("charge-noise amplitude (GHz)")
    ax.set_ylabel("gate infidelity")
    ax.legend(fontsize=7)
    ax.set_title("quasistatic charge noise")
    return fig


FIGURES = {
    "fig2": fig2,
    "fig3a": fig3a,
    "fig3c": fig3c,
    "fig3d": fig3d,
    "fig3e": fig3e,
    "fig4a": fig4a,
    "fig4b": fig4b,
    "fig5": fig5,
}


def render(job: PlotJob) -> Path:
    """Render one job to its output file (created only on success)."""
    if job.figure not in FIGURES:
        raise ValueError(f"unknown figure {job.figure!r}; have {sorted(FIGURES)}")
    style = dict(_STYLE)
    style.update(job.style)
    with plt.rc_context(style):
        fig = FIGURES[job.figure](job.in_dir)
        try:
            job.out_file.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(
                job.out_file,
                metadata=_png_metadata(job.out_file),
                bbox_inches="tight",
            )
        finally:
            plt.close(fig)
    return job.out_file


def _png_metadata(path: Path) -> dict:
    if path.suffix.lower() == ".png":
        return {"Software": "figrender"}
    if path.suffix.lower() == ".svg":
        return {"Date": None}
    return {}
