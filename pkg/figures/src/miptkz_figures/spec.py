"""FigureSpec: the JSON description of a multi-panel figure.

Top-level keys:

* ``name``    — output base name (default: spec file stem)
* ``layout``  — [rows, cols] panel grid (default: one row)
* ``figsize`` — [width, height] in inches (default: 4.2 x 3.4 per panel)
* ``panels``  — list of panel objects (at least one)

Panel kinds:

* ``curves``  — ensemble aggregates plotted against g/p/t.
  Keys: ``inputs`` (list of CSV globs), ``observable``; optional
  ``region_size``, ``x`` ("g"|"p"|"t", default "g"), ``label`` (legend key:
  R, p, p0, direction, L, n_traj; default "R"), ``errorbars`` (default true).
* ``extract`` — one point per aggregate: y = the observable's value at the
  row selected by ``at`` (e.g. {"g": 0.0}); x = the aggregate's ``x_label``
  value (e.g. "R").  Keys: ``inputs``, ``observable``, ``x_label``, ``at``;
  optional ``region_size``, ``errorbars``.
* ``collapse`` — rescaled curves from one collapse CSV.  Keys: ``input``
  (path or glob matching exactly one file); optional ``label`` (legend key
  looked up in the report's curve labels, default "R"), ``errorbars``.

Common optional panel keys: ``title``, ``xlabel``, ``ylabel``, ``xscale``/
``yscale`` ("linear"|"log"), ``legend`` (bool, default true), ``guides``.

Guides (drawn from fit reports, never re-fit here):

* ``{"type": "logline",  "report": <fit report>, "x_range": [lo, hi]?}``
  draws y = slope*ln(x) + intercept.
* ``{"type": "powerlaw", "report": <fit report>, "x_range": [lo, hi]?}``
  draws the pure power term y = amplitude*x^exponent.

Relative input paths and globs resolve against the spec file's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

PANEL_KINDS = ("curves", "extract", "collapse")
GUIDE_TYPES = ("logline", "powerlaw")
AXIS_SCALES = ("linear", "log")
X_CHOICES = ("g", "p", "t")

_COMMON_KEYS = {
    "kind", "title", "xlabel", "ylabel", "xscale", "yscale", "legend", "guides",
}
_PANEL_KEYS = {
    "curves": _COMMON_KEYS | {"inputs", "observable", "region_size", "x", "label", "errorbars"},
    "extract": _COMMON_KEYS | {"inputs", "observable", "region_size", "x_label", "at", "errorbars"},
    "collapse": _COMMON_KEYS | {"input", "label", "errorbars"},
}
_GUIDE_KEYS = {"type", "report", "x_range", "label"}


class SpecError(ValueError):
    """Invalid figure spec (schema-level problem, not a data problem)."""


@dataclass(frozen=True)
class Guide:
    type: str
    report: str
    x_range: tuple | None = None
    label: str | None = None


@dataclass(frozen=True)
class Panel:
    kind: str
    options: dict
    guides: tuple = ()


@dataclass(frozen=True)
class FigureSpec:
    name: str
    panels: tuple
    layout: tuple
    figsize: tuple
    base_dir: Path = field(default_factory=Path)

    def resolve(self, pattern: str) -> list[Path]:
        """Expand one input path/glob relative to the spec's directory."""
        p = Path(pattern)
        if p.is_absolute():
            root, pat = Path(p.anchor), str(p.relative_to(p.anchor))
        else:
            root, pat = self.base_dir, pattern
        matches = sorted(root.glob(pat))
        return [m for m in matches if m.is_file()]


def _check_scale(panel: dict, key: str):
    scale = panel.get(key, "linear")
    if scale not in AXIS_SCALES:
        raise SpecError(f"panel {key} must be one of {AXIS_SCALES}, got {scale!r}")
    return scale


def _parse_guide(raw, where: str) -> Guide:
    if not isinstance(raw, dict):
        raise SpecError(f"{where}: each guide must be an object")
    unknown = sorted(set(raw) - _GUIDE_KEYS)
    if unknown:
        raise SpecError(f"{where}: unknown guide key(s) {unknown}")
    gtype = raw.get("type")
    if gtype not in GUIDE_TYPES:
        raise SpecError(f"{where}: guide type must be one of {GUIDE_TYPES}, got {gtype!r}")
    if not raw.get("report"):
        raise SpecError(f"{where}: guide needs a 'report' path")
    x_range = raw.get("x_range")
    if x_range is not None:
        if (
            not isinstance(x_range, (list, tuple))
            or len(x_range) != 2
            or not all(isinstance(v, (int, float)) for v in x_range)
            or not float(x_range[0]) < float(x_range[1])
        ):
            raise SpecError(f"{where}: x_range must be [lo, hi] with lo < hi")
        x_range = (float(x_range[0]), float(x_range[1]))
    return Guide(gtype, str(raw["report"]), x_range, raw.get("label"))


def _parse_panel(raw, i: int) -> Panel:
    where = f"panels[{i}]"
    if not isinstance(raw, dict):
        raise SpecError(f"{where}: must be an object")
    kind = raw.get("kind")
    if kind not in PANEL_KINDS:
        raise SpecError(f"{where}: kind must be one of {PANEL_KINDS}, got {kind!r}")
    unknown = sorted(set(raw) - _PANEL_KEYS[kind])
    if unknown:
        raise SpecError(f"{where}: unknown key(s) {unknown} for kind {kind!r}")
    _check_scale(raw, "xscale")
    _check_scale(raw, "yscale")

    if kind in ("curves", "extract"):
        inputs = raw.get("inputs")
        if not isinstance(inputs, list) or not inputs or not all(
            isinstance(s, str) for s in inputs
        ):
            raise SpecError(f"{where}: 'inputs' must be a non-empty list of globs")
        if not raw.get("observable"):
            raise SpecError(f"{where}: kind {kind!r} requires 'observable'")
    if kind == "curves":
        x = raw.get("x", "g")
        if x not in X_CHOICES:
            raise SpecError(f"{where}: 'x' must be one of {X_CHOICES}, got {x!r}")
    if kind == "extract":
        at = raw.get("at")
        if (
            not isinstance(at, dict)
            or len(at) != 1
            or next(iter(at)) not in X_CHOICES
            or not isinstance(next(iter(at.values())), (int, float))
        ):
            raise SpecError(
                f"{where}: 'at' must be a single-key object like {{\"g\": 0.0}}"
            )
        if not raw.get("x_label"):
            raise SpecError(f"{where}: kind 'extract' requires 'x_label'")
    if kind == "collapse":
        if not raw.get("input") or not isinstance(raw["input"], str):
            raise SpecError(f"{where}: kind 'collapse' requires a single 'input'")

    guides = tuple(
        _parse_guide(g, where) for g in (raw.get("guides") or ())
    )
    options = {k: v for k, v in raw.items() if k not in ("kind", "guides")}
    return Panel(kind=kind, options=options, guides=guides)


def parse_spec(doc: dict, name_default: str, base_dir: Path) -> FigureSpec:
    if not isinstance(doc, dict):
        raise SpecError("figure spec must be a JSON object")
    unknown = sorted(set(doc) - {"name", "layout", "figsize", "panels"})
    if unknown:
        raise SpecError(f"unknown top-level key(s) {unknown}")
    panels_raw = doc.get("panels")
    if not isinstance(panels_raw, list) or not panels_raw:
        raise SpecError("'panels' must be a non-empty list")
    panels = tuple(_parse_panel(p, i) for i, p in enumerate(panels_raw))

    layout = doc.get("layout", [1, len(panels)])
    if (
        not isinstance(layout, (list, tuple))
        or len(layout) != 2
        or not all(isinstance(v, int) and v > 0 for v in layout)
    ):
        raise SpecError("'layout' must be [rows, cols] of positive integers")
    if layout[0] * layout[1] < len(panels):
        raise SpecError(
            f"layout {layout} has {layout[0] * layout[1]} slots for {len(panels)} panels"
        )

    figsize = doc.get("figsize", [4.2 * layout[1], 3.4 * layout[0]])
    if (
        not isinstance(figsize, (list, tuple))
        or len(figsize) != 2
        or not all(isinstance(v, (int, float)) and v > 0 for v in figsize)
    ):
        raise SpecError("'figsize' must be [width, height] in inches")

    name = doc.get("name", name_default)
    if not isinstance(name, str) or not name:
        raise SpecError("'name' must be a non-empty string")
    return FigureSpec(
        name=name,
        panels=panels,
        layout=(int(layout[0]), int(layout[1])),
        figsize=(float(figsize[0]), float(figsize[1])),
        base_dir=base_dir,
    )


def load_spec(path) -> FigureSpec:
    """Load and validate a FigureSpec JSON file."""
    path = Path(path)
    if not path.is_file():
        raise SpecError(f"spec file {path} not found")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SpecError(f"{path}: invalid JSON: {e}") from None
    return parse_spec(doc, name_default=path.stem, base_dir=path.parent.resolve())
