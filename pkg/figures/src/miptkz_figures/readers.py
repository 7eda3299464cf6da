"""Schema-level readers for the upstream file formats.

These parse the documented CSV/JSON layouts directly (stdlib csv/json);
they do not import the simulation package.  All failures raise
:class:`InputError` naming the offending file (and column, where that is
the problem).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

AGGREGATE_HEADER = ["t", "p", "g", "observable", "region_size", "mean", "sem", "n_traj"]
COLLAPSE_HEADER = ["curve", "x", "y", "yerr"]


class InputError(RuntimeError):
    """A referenced data file is missing, empty, or malformed."""


@dataclass
class Aggregate:
    """One ensemble aggregate: per-(observable, region_size) columns plus
    the identifying labels from the sidecar."""

    path: Path
    columns: dict  # (observable, region_size) -> {t,p,g,mean,sem} arrays
    meta: dict

    def series(self, observable: str, region_size: int | None = None) -> dict:
        keys = [k for k in self.columns if k[0] == observable]
        if not keys:
            have = sorted({k[0] for k in self.columns})
            raise InputError(
                f"{self.path}: no rows for observable {observable!r} (file has {have})"
            )
        if region_size is None:
            if len(keys) > 1:
                raise InputError(
                    f"{self.path}: observable {observable!r} has several region "
                    f"sizes {sorted(k[1] for k in keys)}; set 'region_size'"
                )
            key = keys[0]
        else:
            key = (observable, int(region_size))
            if key not in self.columns:
                raise InputError(
                    f"{self.path}: no rows for {observable!r} at region_size "
                    f"{region_size} (file has {sorted(k[1] for k in keys)})"
                )
        return self.columns[key]

    def label(self, key: str):
        """Identifying value for legends: R, p, p0, direction from the
        schedule; anything else from the run spec (e.g. L, n_traj)."""
        spec = self.meta.get("spec", {})
        sched = spec.get("schedule", {})
        mapping = {"R": "rate", "p": "p", "p0": "p0", "direction": "direction"}
        if key in mapping:
            if mapping[key] not in sched:
                raise InputError(
                    f"{self.path}: sidecar schedule has no {mapping[key]!r} "
                    f"(label {key!r} requested; schedule kind "
                    f"{sched.get('kind')!r})"
                )
            return sched[mapping[key]]
        if key in spec:
            return spec[key]
        raise InputError(f"{self.path}: sidecar has no label {key!r}")


def _read_rows(path: Path, expected_header: list[str]):
    if not path.is_file():
        raise InputError(f"{path}: file not found")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: file is empty") from None
        missing = [c for c in expected_header if c not in header]
        if missing:
            raise InputError(f"{path}: missing column {missing[0]!r} (header {header})")
        rows = list(reader)
    if not rows:
        raise InputError(f"{path}: no data rows")
    idx = {c: header.index(c) for c in expected_header}
    return rows, idx


def _parse_float(path: Path, row_no: int, column: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise InputError(
            f"{path}: line {row_no}: column {column!r} is not a number ({text!r})"
        ) from None


def read_aggregate(path) -> Aggregate:
    """Parse an ensemble aggregate CSV and its ``.meta.json`` sidecar."""
    path = Path(path)
    rows, idx = _read_rows(path, AGGREGATE_HEADER)
    sidecar = path.with_suffix(".meta.json")
    if not sidecar.is_file():
        raise InputError(f"{sidecar}: sidecar not found for {path.name}")
    try:
        meta = json.loads(sidecar.read_text())
    except json.JSONDecodeError as e:
        raise InputError(f"{sidecar}: invalid JSON: {e}") from None

    grouped: dict = {}
    for i, row in enumerate(rows, start=2):
        key = (row[idx["observable"]], int(row[idx["region_size"]]))
        cols = grouped.setdefault(key, {"t": [], "p": [], "g": [], "mean": [], "sem": []})
        for c in ("t", "p", "g", "mean", "sem"):
            cols[c].append(_parse_float(path, i, c, row[idx[c]]))
    columns = {
        key: {c: np.asarray(v, float) for c, v in cols.items()}
        for key, cols in grouped.items()
    }
    return Aggregate(path=path, columns=columns, meta=meta)


@dataclass
class Collapse:
    """Rescaled curves from a collapse CSV plus its ``.report.json``."""

    path: Path
    curves: list  # [{x, y, yerr} arrays] in curve-index order
    report: dict = field(default_factory=dict)

    def curve_label(self, i: int, key: str):
        labels = self.report.get("curves", [])
        if i < len(labels) and key in labels[i]:
            return labels[i][key]
        raise InputError(
            f"{self.path}: collapse report has no label {key!r} for curve {i}"
        )


def read_collapse(path) -> Collapse:
    """Parse a collapse CSV (curve,x,y,yerr) and its ``.report.json``."""
    path = Path(path)
    rows, idx = _read_rows(path, COLLAPSE_HEADER)
    report_path = path.with_suffix(".report.json")
    if not report_path.is_file():
        raise InputError(f"{report_path}: report not found for {path.name}")
    try:
        report = json.loads(report_path.read_text())
    except json.JSONDecodeError as e:
        raise InputError(f"{report_path}: invalid JSON: {e}") from None

    grouped: dict = {}
    for i, row in enumerate(rows, start=2):
        try:
            ci = int(row[idx["curve"]])
        except ValueError:
            raise InputError(
                f"{path}: line {i}: column 'curve' is not an integer "
                f"({row[idx['curve']]!r})"
            ) from None
        cols = grouped.setdefault(ci, {"x": [], "y": [], "yerr": []})
        for c in ("x", "y", "yerr"):
            cols[c].append(_parse_float(path, i, c, row[idx[c]]))
    curves = [
        {c: np.asarray(v, float) for c, v in grouped[ci].items()}
        for ci in sorted(grouped)
    ]
    return Collapse(path=path, curves=curves, report=report)


def read_fit_report(path) -> dict:
    """Parse a fit report JSON; must carry a 'parameters' object."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"{path}: fit report not found")
    try:
        report = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON: {e}") from None
    if not isinstance(report, dict) or "parameters" not in report:
        raise InputError(f"{path}: fit report has no 'parameters' object")
    return report
