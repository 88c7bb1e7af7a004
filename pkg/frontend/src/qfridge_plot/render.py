"""Figure rendering for qfridge CSV tables.

Four figure kinds:

- ``spectrum``        emission-channel densities with peak annotations
- ``spectrum-full``   densities plus the omega-weighted power panel
- ``limit-sweep``     swept occupancy with the closed cooling-limit lines
- ``validate-overlay`` oracle-vs-Floquet check summary

Rendering is deterministic for identical input: Agg backend, pinned style,
no timestamps written into the output file.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np               # noqa: E402

from .reader import CsvTable, SchemaError, read_csv  # noqa: E402

KINDS = ("spectrum", "spectrum-full", "limit-sweep", "validate-overlay")
_EXPECTED_INPUT = {
    "spectrum": "spectrum",
    "spectrum-full": "spectrum",
    "limit-sweep": "sweep",
    "validate-overlay": "validate",
}

_STYLE = {
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "svg.hashsalt": "qfridge-plot",
}


@dataclass
class FigureSpec:
    input_path: str
    kind: str
    output_path: str = None
    logy: bool = False
    annotate: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; "
                              f"expected one of {', '.join(KINDS)}")
        if self.output_path is None:
            self.output_path = f"{self.kind}.png"


def _check_input(table: CsvTable, kind):
    want = _EXPECTED_INPUT[kind]
    if table.kind != want:
        raise SchemaError(
            f"{table.path}: kind {table.kind!r} cannot feed a {kind!r} "
            f"figure (needs a {want!r} CSV)")


def _finish(fig, spec):
    fig.savefig(spec.output_path, metadata={"Software": "qfridge-plot"})
    plt.close(fig)
    return spec.output_path


def _spectrum_axes(ax, table, spec):
    table.require("omega", "f_rp", "f_nrh", "f_pairs")
    w = np.asarray(table.columns["omega"], dtype=float)
    channels = (("f_rp", "tab:blue", "RP line"),
                ("f_nrh", "tab:red", "NRH line"),
                ("f_pairs", "tab:green", "pair continuum"))
    peak = 0.0
    for col, color, label in channels:
        y = np.asarray(table.columns[col], dtype=float)
        ax.plot(w, y, color=color, label=label)
        peak = max(peak, float(np.max(y)) if y.size else 0.0)
    ax.set_xlabel(r"$\omega/\omega_0$")
    ax.set_ylabel("photon flux density")
    if spec.logy:
        ax.set_yscale("log")
    if spec.annotate and peak > 0.0:
        wd = table.meta_float("omega_d")
        wm = table.meta_float("omega_m")
        for line_w, text in ((wd + wm, r"$\omega_d+\omega_m$"),
                             (wd - wm, r"$\omega_d-\omega_m$")):
            ax.axvline(line_w, color="0.4", linestyle=":", linewidth=0.9)
            ax.annotate(text, xy=(line_w, peak), xytext=(line_w, peak * 1.04),
                        ha="center", fontsize=8)
        ax.axvline(wd / 2.0, color="0.4", linestyle="--", linewidth=0.9)
        ax.annotate(r"$\omega_d/2$", xy=(wd / 2.0, peak * 0.5),
                    ha="center", fontsize=8)
    ax.legend(loc="upper left", fontsize=8)


def _render_spectrum(table, spec):
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    _spectrum_axes(ax, table, spec)
    fig.tight_layout()
    return _finish(fig, spec)


def _render_spectrum_full(table, spec):
    table.require("power_rp", "power_nrh", "power_pairs")
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(6.0, 6.0), sharex=True)
    _spectrum_axes(ax0, table, spec)
    ax0.set_xlabel("")
    w = np.asarray(table.columns["omega"], dtype=float)
    for col, color, label in (("power_rp", "tab:blue", "RP power"),
                              ("power_nrh", "tab:red", "NRH power"),
                              ("power_pairs", "tab:green", "pair power")):
        ax1.plot(w, np.asarray(table.columns[col], dtype=float),
                 color=color, label=label)
    ax1.set_xlabel(r"$\omega/\omega_0$")
    ax1.set_ylabel("emitted power density")
    if spec.logy:
        ax1.set_yscale("log")
    ax1.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    return _finish(fig, spec)


def sweep_minimum(table: CsvTable):
    """(omega_d, n_occ) at the feasible numeric minimum of a sweep CSV."""
    table.require("omega_d", "n_occ", "feasible")
    wd = np.asarray(table.columns["omega_d"], dtype=float)
    n = np.asarray(table.columns["n_occ"], dtype=float)
    ok = np.array([str(v).lower() in ("true", "1", "1.0")
                   for v in table.columns["feasible"]])
    if not np.any(ok):
        raise SchemaError(f"{table.path}: no feasible sweep points")
    i = int(np.argmin(np.where(ok, n, np.inf)))
    return float(wd[i]), float(n[i])


def _render_limit_sweep(table, spec):
    wd_min, n_min = sweep_minimum(table)
    wd = np.asarray(table.columns["omega_d"], dtype=float)
    n = np.asarray(table.columns["n_occ"], dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(wd, n, color="tab:blue", label=r"exact $\bar n(\omega_d)$")
    ax.plot([wd_min], [n_min], "v", color="tab:blue", markersize=7,
            label="numeric minimum")
    # closed-form limit lines from the embedded run configuration
    gamma = table.config_float("system", "gamma")
    omega_m = table.config_float("reservoir.a", "mode_frequency")
    sideband = gamma ** 2 / (4.0 * omega_m ** 2)
    doppler = gamma / (2.0 * omega_m)
    ax.axhline(sideband, color="tab:red", linestyle="--",
               label=r"sideband $\gamma^2/4\omega_m^2$")
    ax.axhline(doppler, color="tab:orange", linestyle=":",
               label=r"Doppler $\gamma/2\omega_m$")
    ax.set_xlabel(r"$\omega_d/\omega_0$")
    ax.set_ylabel(r"steady occupancy $\bar n$")
    if spec.logy:
        ax.set_yscale("log")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return _finish(fig, spec)


def _render_validate_overlay(table, spec):
    table.require("check", "measured", "reference", "tolerance", "passed")
    checks = table.columns["check"]
    measured = np.asarray(table.columns["measured"], dtype=float)
    reference = np.asarray(table.columns["reference"], dtype=float)
    tol = np.asarray(table.columns["tolerance"], dtype=float)
    passed = [str(v).lower() == "true" for v in table.columns["passed"]]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(reference != 0.0, measured / reference, np.nan)
    y = np.arange(len(checks))
    fig, ax = plt.subplots(figsize=(6.0, 0.7 * len(checks) + 1.6))
    for i in range(len(checks)):
        ax.barh(y[i], max(ratio[i] - 1.0, -1.0) if math.isfinite(ratio[i])
                else 0.0, left=1.0, height=0.55,
                color="tab:green" if passed[i] else "tab:red")
        ax.plot([1.0 - tol[i], 1.0 + tol[i]], [y[i]] * 2,
                color="0.2", linewidth=4, alpha=0.4, solid_capstyle="butt")
    ax.axvline(1.0, color="0.2", linewidth=0.8)
    ax.set_yticks(y, checks)
    ax.set_xlabel("measured / reference (band: tolerance)")
    ax.invert_yaxis()
    fig.tight_layout()
    return _finish(fig, spec)


_RENDERERS = {
    "spectrum": _render_spectrum,
    "spectrum-full": _render_spectrum_full,
    "limit-sweep": _render_limit_sweep,
    "validate-overlay": _render_validate_overlay,
}


def render(spec: FigureSpec):
    """Render ``spec`` and return the output image path."""
    table = read_csv(spec.input_path)
    _check_input(table, spec.kind)
    with plt.rc_context(_STYLE):
        return _RENDERERS[spec.kind](table, spec)
