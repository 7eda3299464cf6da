"""Matplotlib rendering of a validated FigureSpec.

All numbers plotted here come straight from the input files; the only
transforms applied are the axis scales requested by the spec and the
evaluation of guide-line formulas at fit-report parameters.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .readers import InputError, read_aggregate, read_collapse, read_fit_report
from .spec import FigureSpec, Panel

_RC = {
    "figure.constrained_layout.use": True,
    "font.size": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.2,
    "errorbar.capsize": 0,
    "svg.hashsalt": "miptkz-figures",
}


def _fmt_label(key: str, value) -> str:
    if isinstance(value, float):
        return f"{key}={value:g}"
    return f"{key}={value}"


def _resolve_inputs(spec: FigureSpec, patterns) -> list[Path]:
    paths: list[Path] = []
    for pattern in patterns:
        paths.extend(spec.resolve(pattern))
    if not paths:
        raise InputError(f"no input files match {list(patterns)!r}")
    # de-duplicate while keeping deterministic order
    return sorted(set(paths))


def _sort_key(value):
    return (0, float(value)) if isinstance(value, (int, float)) else (1, str(value))


def _panel_curves(ax, spec: FigureSpec, panel: Panel):
    opts = panel.options
    label_key = opts.get("label", "R")
    x_col = opts.get("x", "g")
    series = []
    for path in _resolve_inputs(spec, opts["inputs"]):
        agg = read_aggregate(path)
        cols = agg.series(opts["observable"], opts.get("region_size"))
        series.append((agg.label(label_key), cols))
    series.sort(key=lambda item: _sort_key(item[0]))
    for value, cols in series:
        yerr = cols["sem"] if opts.get("errorbars", True) else None
        ax.errorbar(
            cols[x_col], cols["mean"], yerr=yerr, elinewidth=0.6,
            label=_fmt_label(label_key, value),
        )
    ax.set_xlabel(opts.get("xlabel", x_col))
    ax.set_ylabel(opts.get("ylabel", opts["observable"]))


def _panel_extract(ax, spec: FigureSpec, panel: Panel):
    opts = panel.options
    (at_col, at_value), = opts["at"].items()
    x_key = opts["x_label"]
    points = []
    for path in _resolve_inputs(spec, opts["inputs"]):
        agg = read_aggregate(path)
        cols = agg.series(opts["observable"], opts.get("region_size"))
        hits = np.flatnonzero(np.abs(cols[at_col] - at_value) < 1e-9)
        if hits.size == 0:
            raise InputError(
                f"{path}: no sample at {at_col}={at_value} "
                f"(nearest {cols[at_col][np.argmin(np.abs(cols[at_col] - at_value))]:g})"
            )
        j = int(hits[0])
        x = agg.label(x_key)
        if not isinstance(x, (int, float)):
            raise InputError(
                f"{path}: label {x_key!r} is not numeric ({x!r}); cannot use as x"
            )
        points.append((float(x), cols["mean"][j], cols["sem"][j]))
    points.sort()
    xs = np.array([p[0] for p in points])
    ys = np.array([p[1] for p in points])
    es = np.array([p[2] for p in points])
    yerr = es if opts.get("errorbars", True) else None
    ax.errorbar(xs, ys, yerr=yerr, linestyle="", marker="o", ms=4, elinewidth=0.8,
                label=f"{opts['observable']} at {at_col}={at_value:g}")
    ax.set_xlabel(opts.get("xlabel", x_key))
    ax.set_ylabel(opts.get("ylabel", opts["observable"]))


def _panel_collapse(ax, spec: FigureSpec, panel: Panel):
    opts = panel.options
    paths = spec.resolve(opts["input"])
    if not paths:
        raise InputError(f"no input files match {opts['input']!r}")
    if len(paths) > 1:
        raise InputError(
            f"'input' must match exactly one file, got {len(paths)}: "
            f"{[str(p) for p in paths]}"
        )
    coll = read_collapse(paths[0])
    label_key = opts.get("label", "R")
    order = sorted(
        range(len(coll.curves)),
        key=lambda i: _sort_key(coll.curve_label(i, label_key)),
    )
    for i in order:
        c = coll.curves[i]
        yerr = c["yerr"] if opts.get("errorbars", True) else None
        ax.errorbar(
            c["x"], c["y"], yerr=yerr, elinewidth=0.6,
            label=_fmt_label(label_key, coll.curve_label(i, label_key)),
        )
    mode = coll.report.get("mode", "")
    ax.set_xlabel(opts.get("xlabel", f"rescaled x ({mode})"))
    ax.set_ylabel(opts.get("ylabel", "rescaled y"))


_PANEL_RENDERERS = {
    "curves": _panel_curves,
    "extract": _panel_extract,
    "collapse": _panel_collapse,
}


def _draw_guides(ax, spec: FigureSpec, panel: Panel):
    if not panel.guides:
        return
    x_lim = ax.get_xlim()
    y_lim = ax.get_ylim()
    styles = {"logline": "--", "powerlaw": "-."}
    for guide in panel.guides:
        report = read_fit_report(spec.base_dir / guide.report)
        params = report["parameters"]
        lo, hi = guide.x_range if guide.x_range else x_lim
        lo = max(lo, 1e-300) if lo <= 0 else lo  # both forms need x > 0
        if not lo < hi:
            raise InputError(
                f"{guide.report}: guide window [{lo}, {hi}] is empty on this panel"
            )
        xs = (
            np.geomspace(lo, hi, 200)
            if ax.get_xscale() == "log"
            else np.linspace(lo, hi, 200)
        )
        if guide.type == "logline":
            for key in ("slope", "intercept"):
                if key not in params:
                    raise InputError(
                        f"{guide.report}: fit report lacks parameter {key!r} "
                        "needed by a logline guide"
                    )
            ys = params["slope"] * np.log(xs) + params["intercept"]
            label = guide.label or f"ln-guide (slope {params['slope']:.3g})"
        else:
            for key in ("amplitude", "exponent"):
                if key not in params:
                    raise InputError(
                        f"{guide.report}: fit report lacks parameter {key!r} "
                        "needed by a powerlaw guide"
                    )
            ys = params["amplitude"] * xs ** params["exponent"]
            label = guide.label or f"power-guide (exponent {params['exponent']:.3g})"
        ax.plot(xs, ys, styles[guide.type], color="black", lw=1.0, label=label)
    ax.set_xlim(x_lim)
    ax.set_ylim(y_lim)


def _render_panel(ax, spec: FigureSpec, panel: Panel):
    opts = panel.options
    _PANEL_RENDERERS[panel.kind](ax, spec, panel)
    ax.set_xscale(opts.get("xscale", "linear"))
    ax.set_yscale(opts.get("yscale", "linear"))
    if "title" in opts:
        ax.set_title(opts["title"])
    if "xlabel" in opts:
        ax.set_xlabel(opts["xlabel"])
    if "ylabel" in opts:
        ax.set_ylabel(opts["ylabel"])
    _draw_guides(ax, spec, panel)
    if opts.get("legend", True):
        ax.legend(frameon=False)


def render(spec: FigureSpec, out_dir, dpi: int = 150) -> tuple[Path, Path]:
    """Render the figure to ``<out_dir>/<name>.svg`` and ``.png``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows, cols = spec.layout
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(rows, cols, figsize=spec.figsize, squeeze=False)
        flat = axes.ravel()
        try:
            for ax, panel in zip(flat, spec.panels):
                _render_panel(ax, spec, panel)
            for ax in flat[len(spec.panels):]:
                ax.set_visible(False)
            svg = out_dir / f"{spec.name}.svg"
            png = out_dir / f"{spec.name}.png"
            # Date-free metadata keeps reruns byte-identical.
            fig.savefig(svg, metadata={"Date": None})
            fig.savefig(png, dpi=dpi)
        finally:
            plt.close(fig)
    return svg, png
