"""Figure rendering: heatmaps, collapse curves, histograms, decay profiles.

Overlays are evaluated locally from the closed forms
    lightcone        x = t
    critical depth   t_c = 1 / (2p)
    front            x_dec(t) = t (1 - p t) / (1 - 2 p t)
    rescaled front   x~(t~) = t~ (1 - t~/2) / (1 - t~)
so any mismatch between an overlay and the data is evidence about the
data, never patched here.  Rendering is deterministic: fixed style, fixed
dpi, no timestamps in the output.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import CsvFormatError, read_csv, require_columns

KINDS = ("heatmap", "collapse", "histogram", "decay")

_STYLE = {
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.size": 9,
    "axes.grid": False,
}


@dataclass
class FigureSpec:
    """One figure: inputs, kind, output path, overlay toggles."""

    kind: str
    inputs: list[str]
    output: str
    overlays: tuple[str, ...] = ("lightcone", "tc", "xdec", "analytic")
    t_values: tuple[int, ...] = ()  # decay kind: depths to draw (default: spread)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


@dataclass
class RenderResult:
    path: Path
    figure: object | None = None


def _lightcone(t):
    return t


def _critical_time(p: float) -> float:
    return 1.0 / (2.0 * p)


def _xdec(t, p: float):
    t = np.asarray(t, dtype=float)
    return t * (1 - p * t) / (1 - 2 * p * t)


def _xdec_rescaled(t_tilde):
    t_tilde = np.asarray(t_tilde, dtype=float)
    return t_tilde * (1 - t_tilde / 2) / (1 - t_tilde)


def render(spec: FigureSpec, keep_figure: bool = False) -> RenderResult:
    """Render the figure and write it to spec.output."""
    with plt.rc_context(_STYLE):
        fig = plt.figure(figsize=(5.0, 3.6))
        try:
            if spec.kind == "heatmap":
                _render_heatmap(fig, spec)
            elif spec.kind == "collapse":
                _render_collapse(fig, spec)
            elif spec.kind == "histogram":
                _render_histogram(fig, spec)
            else:
                _render_decay(fig, spec)
            fig.savefig(spec.output, metadata={"Software": "cmiplots"})
        finally:
            if not keep_figure:
                plt.close(fig)
    return RenderResult(Path(spec.output), fig if keep_figure else None)


def _spread_grid(columns, path):
    require_columns(columns, ["t", "x", "p", "m", "mean_cmi_norm"], path)
    t_vals = np.unique(columns["t"])
    x_vals = np.unique(columns["x"])
    grid = np.full((t_vals.size, x_vals.size), np.nan)
    ti = np.searchsorted(t_vals, columns["t"])
    xi = np.searchsorted(x_vals, columns["x"])
    grid[ti, xi] = columns["mean_cmi_norm"]
    p = float(columns["p"][0])
    return t_vals, x_vals, grid, p


def _render_heatmap(fig, spec: FigureSpec) -> None:
    path = spec.inputs[0]
    t_vals, x_vals, grid, p = _spread_grid(read_csv(path), path)
    ax = fig.add_subplot()
    extent = (x_vals[0] - 0.5, x_vals[-1] + 0.5, t_vals[0] - 0.5, t_vals[-1] + 0.5)
    im = ax.imshow(
        grid,
        origin="lower",
        aspect="auto",
        extent=extent,
        cmap="inferno",
        vmin=0.0,
        vmax=max(np.nanmax(grid), 1e-12),
    )
    fig.colorbar(im, ax=ax, label="normalized CMI")
    if "lightcone" in spec.overlays:
        t = np.linspace(t_vals[0], t_vals[-1], 256)
        line, = ax.plot(_lightcone(t), t, "r--", lw=1.2)
        line.set_gid("overlay-lightcone")
    if p > 0 and "tc" in spec.overlays:
        tc = _critical_time(p)
        if t_vals[0] <= tc <= t_vals[-1]:
            line = ax.axhline(tc, color="white", ls="--", lw=1.0)
            line.set_gid("overlay-tc")
    if p > 0 and "xdec" in spec.overlays:
        tc = _critical_time(p)
        t = np.linspace(t_vals[0], min(t_vals[-1], 0.999 * tc), 512)
        line, = ax.plot(_xdec(t, p), t, "w-", lw=1.2)
        line.set_gid("overlay-xdec")
    ax.set_xlim(extent[0], extent[1])
    ax.set_ylim(extent[2], extent[3])
    ax.set_xlabel("separation x (blocks)")
    ax.set_ylabel("depth t")
    ax.set_title(f"p = {p!r}")


def _render_collapse(fig, spec: FigureSpec) -> None:
    ax = fig.add_subplot()
    markers = "osD^v<>"
    t_tilde_max = 0.0
    for i, path in enumerate(spec.inputs):
        columns = read_csv(path)
        require_columns(columns, ["p", "m", "t_tilde", "x_dec_tilde", "rejected_reason"], path)
        rejected = np.array([bool(str(r)) and str(r) != "nan" for r in columns["rejected_reason"]])
        tt = columns["t_tilde"]
        xt = columns["x_dec_tilde"]
        p = float(columns["p"][0])
        m = int(columns["m"][0])
        ok = ~rejected & ~np.isnan(xt)
        color = f"C{i}"
        ax.plot(tt[ok], xt[ok], markers[i % len(markers)], ms=4, color=color,
                label=f"p={p!r}, m={m}")
        # rejected timesteps (boundary distortion etc.) drawn hollow
        rej = rejected & ~np.isnan(xt)
        if rej.any():
            ax.plot(tt[rej], xt[rej], markers[i % len(markers)], ms=4,
                    mfc="none", color=color)
        if ok.any():
            t_tilde_max = max(t_tilde_max, float(tt[ok].max()))
    if "analytic" in spec.overlays:
        t = np.linspace(0.0, min(max(t_tilde_max * 1.05, 0.5), 0.97), 512)
        line, = ax.plot(t, _xdec_rescaled(t), "k--", lw=1.2, label="analytic")
        line.set_gid("overlay-analytic")
    ax.set_xlabel(r"rescaled depth $\tilde{t}$")
    ax.set_ylabel(r"rescaled front $\tilde{x}_{dec}$")
    ax.legend(frameon=False)


def _render_histogram(fig, spec: FigureSpec) -> None:
    ax = fig.add_subplot()
    for path in spec.inputs:
        columns = read_csv(path)
        require_columns(columns, ["delta", "count"], path)
        meta = columns["#meta"]
        total = columns["count"].sum()
        label = f"n={meta.get('n', '?')}, k={meta.get('k', '?')}"
        ax.semilogy(columns["delta"], columns["count"] / total, "o-", ms=3, label=label)
    ax.set_xlabel("length deviation from ideal")
    ax.set_ylabel("fraction of rows")
    ax.legend(frameon=False)


def _render_decay(fig, spec: FigureSpec) -> None:
    path = spec.inputs[0]
    columns = read_csv(path)
    t_vals, x_vals, grid, p = _spread_grid(columns, path)
    wanted = spec.t_values or tuple(
        int(t) for t in t_vals[:: max(1, t_vals.size // 4)][:4]
    )
    ax = fig.add_subplot()
    for t in wanted:
        ti = np.searchsorted(t_vals, t)
        if ti >= t_vals.size or t_vals[ti] != t:
            raise CsvFormatError(f"{path}: depth t={t} not present")
        ax.plot(x_vals, grid[ti], "o-", ms=3, label=f"t={t}")
    ax.set_xlabel("separation x (blocks)")
    ax.set_ylabel("normalized CMI")
    ax.set_title(f"p = {p!r}")
    ax.legend(frameon=False)
