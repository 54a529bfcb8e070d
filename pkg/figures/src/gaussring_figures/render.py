"""Figure rendering from export directories.

Four figure kinds cover the study's visual layouts:

- ``lineshape-panel``: bus transmission spectra from a scenario export.
- ``jsa-jta-grid``: per-pair columns with the |JSA| contour on top (greens)
  and the |JTA| contour below (purples).
- ``histogram-set``: ensemble histograms of linewidths, purity and pair
  probability with optional baseline reference lines.
- ``overlay-panel``: purity and pair-probability curves along a sweep.

Rendering is deterministic: fixed style, fixed figure geometry, no
timestamps or environment-dependent metadata in the output files.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from gaussring_figures.dataio import (  # noqa: E402
    SchemaError,
    column,
    find_pairs,
    load_field,
    load_jsa,
    load_jta,
    load_manifest,
    load_table,
)

KINDS = ("lineshape-panel", "jsa-jta-grid", "histogram-set", "overlay-panel")

#: default JSA/JTA axis window (half the production grid span)
DEFAULT_K_WINDOW = 1257.51

#: fixed style so identical inputs render identical bytes
_STYLE = {
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.size": 9,
    "axes.grid": False,
    "svg.hashsalt": "gaussring-figures",
}


@dataclass
class FigureSpec:
    """One figure request: kind, input export directory, output, styling."""

    kind: str
    input_dir: str
    out_dir: str
    name: str = ""
    formats: tuple[str, ...] = ("png",)
    options: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; "
                              f"expected one of {', '.join(KINDS)}")
        if not self.name:
            self.name = self.kind.replace("-", "_")


def render(spec: FigureSpec) -> list[str]:
    """Render one figure; returns the written file paths."""
    load_manifest(spec.input_dir)
    os.makedirs(spec.out_dir, exist_ok=True)
    with plt.rc_context(_STYLE):
        fig = _BUILDERS[spec.kind](spec)
        paths = []
        for fmt in spec.formats:
            path = os.path.join(spec.out_dir, f"{spec.name}.{fmt}")
            fig.savefig(path, format=fmt, metadata=_clean_metadata(fmt))
            paths.append(path)
        plt.close(fig)
    return paths


def _clean_metadata(fmt: str) -> dict:
    """Strip per-run metadata so re-renders are byte-identical."""
    if fmt == "png":
        return {"Software": "gaussring-figures"}
    if fmt == "svg":
        return {"Date": None, "Creator": "gaussring-figures"}
    return {}


def _lineshape_panel(spec: FigureSpec):
    path = os.path.join(spec.input_dir, "pump_transmitted.csv")
    fields = load_field(path)
    bus = {m: kv for m, kv in fields.items() if "1" in m}
    if not bus:
        raise SchemaError(f"no bus modes found in {path}")
    fig, ax = plt.subplots(figsize=(4.0, 3.0), constrained_layout=True)
    for mode in sorted(bus):
        k, vals = bus[mode]
        ax.plot(k, np.abs(vals) ** 2, label=mode, linewidth=1.2)
    ax.set_xlabel(r"$k$ (1/m)")
    ax.set_ylabel(r"$|t|^2$")
    ax.set_ylim(-0.02, 1.05)
    ax.legend(frameon=False)
    return fig


def _jsa_jta_grid(spec: FigureSpec):
    jsas = find_pairs(spec.input_dir, "jsa")
    jtas = find_pairs(spec.input_dir, "jta")
    tags = [t for t in jsas if t in jtas]
    if not tags:
        raise SchemaError(
            f"no paired jsa_*/jta_* exports found in {spec.input_dir}")
    window = float(spec.options.get("k_window", DEFAULT_K_WINDOW))
    fig, axes = plt.subplots(2, len(tags),
                             figsize=(2.6 * len(tags), 5.0),
                             squeeze=False, constrained_layout=True)
    for col, tag in enumerate(tags):
        k, kp, jsa = load_jsa(jsas[tag])
        ax = axes[0][col]
        ax.contourf(k, kp, np.abs(jsa).T, levels=24, cmap="Greens")
        ax.set_xlim(-window, window)
        ax.set_ylim(-window, window)
        ax.set_title(tag)
        ax.set_xlabel(r"$k$ (1/m)")
        if col == 0:
            ax.set_ylabel(r"$k'$ (1/m)")
        ts, ti, jta = load_jta(jtas[tag])
        ax = axes[1][col]
        ax.contourf(ts * 1e9, ti * 1e9, np.abs(jta).T, levels=24,
                    cmap="Purples")
        ax.set_xlabel(r"$t_s$ (ns)")
        if col == 0:
            ax.set_ylabel(r"$t_i$ (ns)")
    return fig


_HIST_PANELS = (
    ("pump_linewidth", "pump linewidth (1/m)"),
    ("signal_linewidth", "signal linewidth (1/m)"),
    ("idler_linewidth", "idler linewidth (1/m)"),
    ("purity_ff", "f-f purity"),
    ("pair_probability_ff", "f-f pair probability"),
)


def _histogram_set(spec: FigureSpec):
    rows = load_table(os.path.join(spec.input_dir, "ensemble.csv"))
    baseline = spec.options.get("baseline", {})
    bins = int(spec.options.get("bins", 50))
    fig, axes = plt.subplots(1, len(_HIST_PANELS),
                             figsize=(2.4 * len(_HIST_PANELS), 2.6),
                             constrained_layout=True)
    for ax, (col_name, label) in zip(axes, _HIST_PANELS):
        vals = column(rows, col_name)
        vals = vals[np.isfinite(vals)]
        if vals.size == 0:
            raise SchemaError(f"no finite values for {col_name!r}")
        ax.hist(vals, bins=bins, color="#4a7c59")
        if col_name in baseline:
            ax.axvline(float(baseline[col_name]), color="#6a3d9a",
                       linewidth=1.4, linestyle="--")
        ax.set_xlabel(label)
    axes[0].set_ylabel("devices")
    return fig


def _overlay_panel(spec: FigureSpec):
    rows = load_table(os.path.join(spec.input_dir, "sweep.csv"))
    x = column(rows, "value")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.0, 2.8),
                                   constrained_layout=True)
    plotted = False
    for pair, color in (("ff", "#1b7837"), ("bb", "#762a83"),
                        ("fb", "#2166ac"), ("bf", "#b2182b")):
        purity = column(rows, f"purity_{pair}", allow_missing=True)
        prob = column(rows, f"pair_probability_{pair}", allow_missing=True)
        if not np.any(np.isfinite(purity)):
            continue
        plotted = True
        ax1.plot(x, purity, color=color, label=pair, linewidth=1.2)
        ax2.plot(x, prob, color=color, label=pair, linewidth=1.2)
    if not plotted:
        raise SchemaError("sweep export contains no purity columns")
    ax1.set_xlabel(str(rows[0].get("parameter", "value")))
    ax1.set_ylabel("purity")
    ax2.set_xlabel(str(rows[0].get("parameter", "value")))
    ax2.set_ylabel("pair probability")
    ax1.legend(frameon=False)
    return fig


_BUILDERS = {
    "lineshape-panel": _lineshape_panel,
    "jsa-jta-grid": _jsa_jta_grid,
    "histogram-set": _histogram_set,
    "overlay-panel": _overlay_panel,
}
