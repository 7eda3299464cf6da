"""Hand-built fixture files matching the upstream schemas exactly.

Everything here is written byte-by-byte from the documented formats, so
these tests stay independent of the simulation package.
"""

from __future__ import annotations

import json

import numpy as np
import pytest

P_C = 0.15995

AGG_HEADER = "t,p,g,observable,region_size,mean,sem,n_traj"


def _ramp_schedule(rate, p0=0.30995, direction="from_area"):
    return {
        "kind": "linear_ramp",
        "p0": p0,
        "rate": rate,
        "direction": direction,
        "p_c": P_C,
        "p_end": round(2 * P_C - p0, 8),
    }


def write_aggregate(
    directory,
    name,
    *,
    g,
    mean,
    sem=None,
    observable="S_half",
    region_size=64,
    schedule=None,
    L=128,
    n_traj=10,
):
    g = np.asarray(g, float)
    mean = np.asarray(mean, float)
    sem = np.full_like(mean, 0.05) if sem is None else np.asarray(sem, float)
    lines = [AGG_HEADER]
    for i in range(g.size):
        lines.append(
            f"{i / 2:.17g},{g[i] + P_C:.17g},{g[i]:.17g},{observable},"
            f"{region_size},{mean[i]:.17g},{sem[i]:.17g},{n_traj}"
        )
    csv_path = directory / f"{name}.csv"
    csv_path.write_text("\n".join(lines) + "\n")
    meta = {
        "format": "miptkz-aggregate-v1",
        "code_version": "0.0-fixture",
        "master_seed": 1,
        "n_traj": n_traj,
        "backend": "numpy",
        "workers": 1,
        "wall_clock_seconds": 0.0,
        "created_unix": 0.0,
        "spec": {
            "L": L,
            "T_eq": None,
            "ancilla_site": None,
            "master_seed": 1,
            "measure_before_unitaries": False,
            "n_traj": n_traj,
            "observables": [observable],
            "prep_p": None,
            "region_sizes": [region_size] if observable == "S_region" else [],
            "sample_grid": list(np.round(g + P_C, 8)),
            "schedule": schedule or _ramp_schedule(0.08),
        },
    }
    (directory / f"{name}.meta.json").write_text(json.dumps(meta, indent=1))
    return csv_path


def write_collapse(directory, name, curves, labels, mode="VELOCITY"):
    lines = ["curve,x,y,yerr"]
    for i, c in enumerate(curves):
        for x, y, e in zip(c["x"], c["y"], c["yerr"]):
            lines.append(f"{i},{x:.17g},{y:.17g},{e:.17g}")
    csv_path = directory / f"{name}.csv"
    csv_path.write_text("\n".join(lines) + "\n")
    report = {
        "mode": mode,
        "constants": {"p_c": P_C, "nu": 1.26, "z": 1.0, "alpha": 1.57},
        "quality": 0.01,
        "unrescaled_quality": 0.2,
        "fixed_product": None,
        "curves": labels,
    }
    (directory / f"{name}.report.json").write_text(json.dumps(report, indent=1))
    return csv_path


def write_fit_report(directory, name, parameters, model="test model"):
    path = directory / f"{name}.report.json"
    path.write_text(
        json.dumps(
            {
                "model": model,
                "parameters": parameters,
                "stderr": {k: 0.01 for k in parameters},
                "rss": 0.0,
                "n_points": 4,
                "window": None,
            },
            indent=1,
        )
    )
    return path


@pytest.fixture
def ramp_family(tmp_path):
    """Three ramp aggregates at different rates plus collapse + fit files."""
    g = np.linspace(0.15, -0.15, 31)
    paths = []
    for rate in (0.32, 0.08, 0.02):
        mean = 2.0 + np.tanh(-g / (0.05 + rate)) + 0.8 * np.log(1.0 / rate)
        paths.append(
            write_aggregate(
                tmp_path,
                f"ramp_R{rate:g}",
                g=g,
                mean=mean,
                schedule=_ramp_schedule(rate),
            )
        )
    curves = []
    for k in range(3):
        x = np.linspace(-1.0, 1.0, 21)
        curves.append({"x": x, "y": np.tanh(-x), "yerr": np.full_like(x, 0.02)})
    collapse = write_collapse(
        tmp_path,
        "velocity",
        curves,
        labels=[{"R": r, "L": 128, "observable": "S_half"} for r in (0.32, 0.08, 0.02)],
    )
    log_report = write_fit_report(
        tmp_path, "decay", {"slope": -0.87, "intercept": 1.5},
        model="S = slope*ln(R) + intercept",
    )
    power_report = write_fit_report(
        tmp_path, "growth",
        {"amplitude": 12.0, "exponent": 0.55, "log_coeff": 0.3, "constant": 1.0},
        model="S = a*R^kappa + b*ln(R) + c",
    )
    return {
        "dir": tmp_path,
        "aggregates": paths,
        "collapse": collapse,
        "log_report": log_report,
        "power_report": power_report,
    }
