"""Figure rendering from run CSVs: decay curves, quotient ceilings, sweeps.

Nothing is recomputed here: every plotted quantity comes straight from the
CSV columns and metadata, so figures are pure artifacts of the runs.  Output
is deterministic for identical inputs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvdata import PlotDataError, finite_positive, read_csv, require_columns

FIGSIZE = (6.4, 4.2)
DPI = 130
PNG_METADATA = {"Software": "slowdecay-plots"}


class FigureKind(enum.Enum):
    NORM_DECAY = "norm_decay"
    ENERGY_DECAY = "energy_decay"
    QUOTIENT_CEILING = "quotient_ceiling"
    SWEEP_SUMMARY = "sweep_summary"


@dataclass(frozen=True)
class PlotSpec:
    kind: FigureKind
    csv_paths: tuple[str, ...]
    out_path: str
    p: float | None = None          # nonlinearity exponent for reference lines
    sigma1: float | None = None     # ceiling override for quotient figures


@dataclass(frozen=True)
class RenderInfo:
    out_path: str
    kind: FigureKind
    n_curves: int
    reference_exponent: float | None


def _meta_float(metadata: dict[str, str], key: str) -> float | None:
    if key in metadata:
        try:
            return float(metadata[key])
        except ValueError:
            return None
    return None


def _resolve_p(spec: PlotSpec, metadata: dict[str, str]) -> float:
    p = spec.p if spec.p is not None else _meta_float(metadata, "p")
    if p is None or not p > 0:
        raise PlotDataError("exponent p unavailable: pass --p or use run metadata")
    return p


def _reference_line(ax, t, values, exponent, label):
    # anchor the power law at the last plotted point
    c = values[-1] / (1.0 + t[-1]) ** exponent
    ax.loglog(1.0 + t, c * (1.0 + t) ** exponent, "k--", linewidth=1.0, label=label)


def _render_norm_decay(spec: PlotSpec, ax) -> RenderInfo:
    exponent = None
    n = 0
    for path in spec.csv_paths:
        metadata, cols = read_csv(path)
        require_columns(cols, ("t", "norm_u"), path)
        t, v = finite_positive(cols["t"], cols["norm_u"])
        if len(t) == 0:
            raise PlotDataError(f"{path}: no positive norm_u samples to plot")
        ax.loglog(1.0 + t, v, label=Path(path).stem)
        n += 1
        if exponent is None:
            p = _resolve_p(spec, metadata)
            exponent = -1.0 / p
            _reference_line(ax, t, v, exponent, f"(1+t)^{exponent:g}")
            y0 = _meta_float(metadata, "cert_y0")
            rate = _meta_float(metadata, "cert_envelope_rate")
            member = metadata.get("cert_member") == "1"
            if member and y0 and rate:
                env = y0 * (1.0 + y0 ** (p / 2.0) * rate * t) ** (-2.0 / p)
                ax.loglog(1.0 + t, np.sqrt(env), "r:", linewidth=1.2,
                          label="lower envelope")
    ax.set_xlabel("1 + t")
    ax.set_ylabel("|u|")
    ax.set_title("norm decay")
    ax.legend(fontsize=8)
    return RenderInfo(spec.out_path, spec.kind, n, exponent)


def _render_energy_decay(spec: PlotSpec, ax) -> RenderInfo:
    exponent = None
    n = 0
    for path in spec.csv_paths:
        metadata, cols = read_csv(path)
        require_columns(cols, ("t", "E_big"), path)
        t, v = finite_positive(cols["t"], cols["E_big"])
        if len(t) == 0:
            raise PlotDataError(f"{path}: no positive E_big samples to plot")
        ax.loglog(1.0 + t, v, label=Path(path).stem)
        n += 1
        if exponent is None:
            p = _resolve_p(spec, metadata)
            exponent = -(1.0 + 2.0 / p)
            _reference_line(ax, t, v, exponent, f"(1+t)^{exponent:g}")
    ax.set_xlabel("1 + t")
    ax.set_ylabel("energy")
    ax.set_title("energy decay")
    ax.legend(fontsize=8)
    return RenderInfo(spec.out_path, spec.kind, n, exponent)


def _render_quotient_ceiling(spec: PlotSpec, ax) -> RenderInfo:
    n = 0
    ceiling_drawn = False
    for path in spec.csv_paths:
        metadata, cols = read_csv(path)
        require_columns(cols, ("t", "G", "G_hat"), path)
        t = cols["t"]
        for name, style in (("G", "-"), ("G_hat", "--")):
            v = cols[name]
            keep = np.isfinite(v)
            if not np.any(keep):
                raise PlotDataError(f"{path}: column {name} has no finite samples")
            ax.plot(1.0 + t[keep], v[keep], style, label=f"{Path(path).stem}:{name}")
        n += 1
        if not ceiling_drawn:
            sigma1 = spec.sigma1
            if sigma1 is None:
                sigma1 = _meta_float(metadata, "cert_sigma1")
            if sigma1 is not None:
                ax.axhline(2.0 * sigma1, color="k", linestyle=":",
                           label="2*sigma1 ceiling")
                ceiling_drawn = True
            delta = _meta_float(metadata, "cert_delta")
            big_r = _meta_float(metadata, "cert_R")
            ghat = cols["G_hat"]
            if delta and big_r is not None and np.isfinite(ghat[0]):
                floor = 128.0 * big_r**2 / delta**2
                bound = (ghat[0] - floor) * np.exp(-delta * t / 32.0) + floor
                ax.plot(1.0 + t, bound, "r-.", linewidth=1.0,
                        label="exponential bound")
    if not ceiling_drawn:
        raise PlotDataError("sigma1 unavailable: pass --sigma1 or use run metadata")
    ax.set_xscale("log")
    ax.set_xlabel("1 + t")
    ax.set_ylabel("quotient")
    ax.set_title("quotient ceiling")
    ax.legend(fontsize=8)
    return RenderInfo(spec.out_path, spec.kind, n, None)


def _render_sweep_summary(spec: PlotSpec, ax) -> RenderInfo:
    exponent = None
    n = 0
    for path in spec.csv_paths:
        metadata, cols = read_csv(path)
        require_columns(cols, ("amplitude", "exponent"), path)
        amp = cols["amplitude"]
        fitted = cols["exponent"]
        keep = np.isfinite(amp) & np.isfinite(fitted)
        if not np.any(keep):
            raise PlotDataError(f"{path}: no finite sweep rows to plot")
        labels = cols.get("classification")
        if isinstance(labels, list):
            groups = sorted(set(labels))
            for grp in groups:
                sel = keep & np.array([c == grp for c in labels])
                if np.any(sel):
                    ax.semilogx(amp[sel], fitted[sel], "o", label=grp)
        else:
            ax.semilogx(amp[keep], fitted[keep], "o")
        n += 1
        if exponent is None and spec.p is not None:
            exponent = -1.0 / spec.p
            ax.axhline(exponent, color="k", linestyle="--",
                       label=f"target {exponent:g}")
    ax.set_xlabel("amplitude")
    ax.set_ylabel("fitted exponent")
    ax.set_title("sweep summary")
    ax.legend(fontsize=8)
    return RenderInfo(spec.out_path, spec.kind, n, exponent)


_RENDERERS = {
    FigureKind.NORM_DECAY: _render_norm_decay,
    FigureKind.ENERGY_DECAY: _render_energy_decay,
    FigureKind.QUOTIENT_CEILING: _render_quotient_ceiling,
    FigureKind.SWEEP_SUMMARY: _render_sweep_summary,
}


def render(spec: PlotSpec) -> RenderInfo:
    """Render one figure; raises PlotDataError before touching the output."""
    if not spec.csv_paths:
        raise PlotDataError("no input CSVs")
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    try:
        info = _RENDERERS[spec.kind](spec, ax)
        fig.tight_layout()
        fig.savefig(spec.out_path, metadata=PNG_METADATA)
    finally:
        plt.close(fig)
    return info
