"""Trajectory ensembles: seeding, reduction, and on-disk aggregates.

A :class:`RunSpec` pins everything needed to reproduce an ensemble.  Each
trajectory gets an independent PCG64 seed derived from the master seed
with a SplitMix64 finalizer (a bijection on 64-bit words, so distinct
trajectory indices can never collide for a given master seed).  Results
are reduced in trajectory-index order regardless of worker count, so the
aggregate bytes depend only on the spec and master seed.

Aggregates are stored as a CSV table with columns
``t,p,g,observable,region_size,mean,sem,n_traj`` (floats printed with 17
significant digits so they round-trip exactly) plus a JSON sidecar
``<name>.meta.json`` on the side carrying the spec echo, master seed,
code version, and wall-clock metadata.
"""

from __future__ import annotations

import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from . import kernels
from .clifford import enumerate_2q_group
from .protocol import (
    OBSERVABLE_NAMES,
    CircuitConfig,
    ConstantDrive,
    LinearRamp,
    run_trajectory,
)

__all__ = [
    "RunSpec",
    "EnsembleAggregate",
    "trajectory_seed",
    "run_ensemble",
    "write_aggregate",
    "read_aggregate",
    "sidecar_path",
    "schedule_to_dict",
    "schedule_from_dict",
    "CSV_HEADER",
    "VOLATILE_METADATA_KEYS",
]

CSV_HEADER = "t,p,g,observable,region_size,mean,sem,n_traj"

# Sidecar keys that may legitimately differ between byte-identical runs.
VOLATILE_METADATA_KEYS = frozenset(
    {"wall_clock_seconds", "workers", "created_unix", "backend"}
)

_GAMMA = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def trajectory_seed(master_seed: int, index: int) -> int:
    """Derive the PCG64 seed of trajectory ``index`` (SplitMix64)."""
    if index < 0:
        raise ValueError(f"trajectory index must be >= 0, got {index}")
    z = (int(master_seed) + _GAMMA * (index + 1)) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def schedule_to_dict(schedule) -> dict:
    if isinstance(schedule, ConstantDrive):
        return {"kind": "constant", "p": schedule.p, "p_c": schedule.p_c}
    if isinstance(schedule, LinearRamp):
        return {
            "kind": "linear_ramp",
            "p0": schedule.p0,
            "rate": schedule.rate,
            "direction": schedule.direction,
            "p_c": schedule.p_c,
            "p_end": schedule.p_end,
        }
    raise TypeError(f"unknown schedule type {type(schedule).__name__}")


def schedule_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "constant":
        return ConstantDrive(p=d["p"], p_c=d.get("p_c", ConstantDrive.p_c))
    if kind == "linear_ramp":
        return LinearRamp(
            p0=d["p0"],
            rate=d["rate"],
            direction=d["direction"],
            p_c=d.get("p_c", LinearRamp.p_c),
            p_end=d.get("p_end"),
        )
    raise ValueError(f"unknown schedule kind {kind!r}")


@dataclass(frozen=True)
class RunSpec:
    """Complete, serializable description of one trajectory ensemble."""

    L: int
    schedule: ConstantDrive | LinearRamp
    n_traj: int
    master_seed: int
    observables: tuple = ("S_half",)
    region_sizes: tuple = ()
    T_eq: int | None = None
    prep_p: float | None = None
    sample_grid: tuple | None = None
    ancilla_site: int | None = None
    measure_before_unitaries: bool = False

    def __post_init__(self):
        object.__setattr__(self, "observables", tuple(self.observables))
        object.__setattr__(self, "region_sizes", tuple(int(s) for s in self.region_sizes))
        if self.sample_grid is not None:
            object.__setattr__(
                self, "sample_grid", tuple(float(v) for v in self.sample_grid)
            )
        if self.n_traj < 1:
            raise ValueError(f"n_traj must be >= 1, got {self.n_traj}")
        if not 0 <= int(self.master_seed) <= _MASK:
            raise ValueError("master_seed must fit in 64 bits")
        for size in self.region_sizes:
            if size > self.L // 2:
                raise ValueError(
                    f"region size {size} exceeds L/2 = {self.L // 2}"
                )
        for name in self.observables:
            if name not in OBSERVABLE_NAMES:
                raise ValueError(
                    f"unknown observable {name!r}; expected one of "
                    f"{OBSERVABLE_NAMES}"
                )
        if "S_region" in self.observables and not self.region_sizes:
            raise ValueError("S_region requested but region_sizes is empty")
        # Fail fast on geometry mismatches.
        self.config()

    def config(self) -> CircuitConfig:
        return CircuitConfig(
            L=self.L, measure_before_unitaries=self.measure_before_unitaries
        )

    def to_dict(self) -> dict:
        return {
            "L": self.L,
            "schedule": schedule_to_dict(self.schedule),
            "n_traj": self.n_traj,
            "master_seed": self.master_seed,
            "observables": list(self.observables),
            "region_sizes": list(self.region_sizes),
            "T_eq": self.T_eq,
            "prep_p": self.prep_p,
            "sample_grid": list(self.sample_grid) if self.sample_grid is not None else None,
            "ancilla_site": self.ancilla_site,
            "measure_before_unitaries": self.measure_before_unitaries,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunSpec":
        return cls(
            L=d["L"],
            schedule=schedule_from_dict(d["schedule"]),
            n_traj=d["n_traj"],
            master_seed=d["master_seed"],
            observables=tuple(d.get("observables", ("S_half",))),
            region_sizes=tuple(d.get("region_sizes", ())),
            T_eq=d.get("T_eq"),
            prep_p=d.get("prep_p"),
            sample_grid=tuple(d["sample_grid"]) if d.get("sample_grid") is not None else None,
            ancilla_site=d.get("ancilla_site"),
            measure_before_unitaries=d.get("measure_before_unitaries", False),
        )


@dataclass
class EnsembleAggregate:
    """Ensemble means over shared sample points.

    ``mean``/``sem`` have shape ``(n_points, n_keys)`` where ``keys`` are
    ``(observable, region_size)`` pairs in evaluation order.
    """

    spec: RunSpec
    t: np.ndarray
    p: np.ndarray
    g: np.ndarray
    keys: list
    mean: np.ndarray
    sem: np.ndarray
    n_traj: int
    metadata: dict = field(default_factory=dict)

    def curve(self, observable: str, region_size: int | None = None) -> dict:
        """Columns for one observable: dict of t/p/g/mean/sem arrays."""
        if region_size is None:
            if observable == "S_half":
                region_size = self.spec.L // 2
            elif observable in ("I3", "S_Q"):
                region_size = 0
            else:
                raise ValueError(f"region_size required for observable {observable!r}")
        key = (observable, int(region_size))
        try:
            j = self.keys.index(key)
        except ValueError:
            raise KeyError(f"no column for {key}; have {self.keys}") from None
        # Mixed-granularity runs leave NaN holes at points where this
        # observable was not read; drop them so the curve is contiguous.
        m = ~np.isnan(self.mean[:, j])
        return {
            "t": self.t[m],
            "p": self.p[m],
            "g": self.g[m],
            "mean": self.mean[m, j],
            "sem": self.sem[m, j],
        }

    def rows(self):
        for i in range(self.t.size):
            for j, (name, size) in enumerate(self.keys):
                if np.isnan(self.mean[i, j]):
                    continue
                yield (
                    self.t[i],
                    self.p[i],
                    self.g[i],
                    name,
                    size,
                    self.mean[i, j],
                    self.sem[i, j],
                    self.n_traj,
                )


def _run_one(spec: RunSpec, index: int):
    seed = trajectory_seed(spec.master_seed, index)
    return run_trajectory(
        spec.config(),
        spec.schedule,
        seed,
        observables=spec.observables,
        region_sizes=spec.region_sizes,
        T_eq=spec.T_eq,
        prep_p=spec.prep_p,
        sample_grid=spec.sample_grid,
        ancilla_site=spec.ancilla_site,
    )


def _worker(args):
    spec, index = args
    try:
        return index, _run_one(spec, index)
    except Exception as e:  # re-raised with the index in the parent
        return index, ("__error__", f"{type(e).__name__}: {e}")


def run_ensemble(
    spec: RunSpec,
    workers: int = 1,
    progress: bool = False,
    keep_trajectories: bool = False,
) -> EnsembleAggregate:
    """Run ``spec.n_traj`` trajectories and reduce them in index order.

    ``workers > 1`` forks a process pool; the reduction (and therefore the
    aggregate, byte for byte) is independent of the worker count.  With
    ``keep_trajectories`` the per-trajectory values (shape
    ``(n_traj, n_points, n_keys)``) are attached to the aggregate's
    metadata-free ``trajectories`` attribute (in memory only, never
    serialized).
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    enumerate_2q_group()  # build once; forked workers inherit it
    started = time.time()
    n = spec.n_traj
    results = [None] * n
    step = max(1, n // 20)
    if workers == 1:
        for i in range(n):
            try:
                results[i] = _run_one(spec, i)
            except Exception as e:
                raise RuntimeError(f"trajectory {i} failed: {e}") from e
            if progress and ((i + 1) % step == 0 or i + 1 == n):
                print(f"  trajectory {i + 1}/{n}", file=sys.stderr, flush=True)
    else:
        ctx = get_context("fork")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as ex:
            done = 0
            chunk = max(1, n // (8 * workers))
            for idx, samples in ex.map(
                _worker, ((spec, i) for i in range(n)), chunksize=chunk
            ):
                if isinstance(samples, tuple) and samples and samples[0] == "__error__":
                    raise RuntimeError(f"trajectory {idx} failed: {samples[1]}")
                results[idx] = samples
                done += 1
                if progress and (done % step == 0 or done == n):
                    print(f"  trajectory {done}/{n}", file=sys.stderr, flush=True)

    ref = results[0]
    n_pts = len(ref)
    # Observable keys in first-appearance order.  Mixed-granularity runs
    # (ancilla entropy on half periods, cut entropies on full periods)
    # leave NaN holes where a key has no sample at a point; rows()/curve()
    # skip the holes, so the CSV stays hole-free long-format.
    keys: list = []
    for s in ref:
        for key in s.values:
            if key not in keys:
                keys.append(key)
    kidx = {key: j for j, key in enumerate(keys)}
    t = np.array([s.t for s in ref], float)
    p = np.array([s.p for s in ref], float)
    g = np.array([s.g for s in ref], float)
    vals = np.full((n, n_pts, len(keys)), np.nan)
    for i, traj in enumerate(results):
        if len(traj) != n_pts:
            raise RuntimeError(
                f"trajectory {i} produced {len(traj)} samples, expected {n_pts}"
            )
        for k, s in enumerate(traj):
            if s.t != ref[k].t or s.p != ref[k].p:
                raise RuntimeError(
                    f"trajectory {i} sample {k} at (t={s.t}, p={s.p}) does not "
                    f"match trajectory 0 at (t={ref[k].t}, p={ref[k].p})"
                )
            if s.values.keys() != ref[k].values.keys():
                raise RuntimeError(
                    f"trajectory {i} sample {k} has observables "
                    f"{sorted(map(str, s.values))}, expected "
                    f"{sorted(map(str, ref[k].values))}"
                )
            for key, v in s.values.items():
                vals[i, k, kidx[key]] = v

    mean = vals.mean(axis=0)
    if n > 1:
        sem = vals.std(axis=0, ddof=1) / np.sqrt(n)
    else:
        sem = np.zeros_like(mean)
    metadata = {
        "master_seed": spec.master_seed,
        "n_traj": n,
        "workers": workers,
        "backend": kernels.BACKEND,
        "wall_clock_seconds": time.time() - started,
        "created_unix": started,
    }
    agg = EnsembleAggregate(
        spec=spec, t=t, p=p, g=g, keys=keys, mean=mean, sem=sem, n_traj=n,
        metadata=metadata,
    )
    if keep_trajectories:
        agg.trajectories = vals
    return agg


def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".meta.json")


def write_aggregate(agg: EnsembleAggregate, csv_path) -> Path:
    """Write the aggregate CSV plus its ``.meta.json`` sidecar."""
    from . import __version__

    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    lines = [CSV_HEADER]
    for t, p, g, name, size, mean, sem, n in agg.rows():
        lines.append(
            f"{t:.17g},{p:.17g},{g:.17g},{name},{size:d},{mean:.17g},{sem:.17g},{n:d}"
        )
    csv_path.write_text("\n".join(lines) + "\n")
    meta = {
        "format": "miptkz-aggregate-v1",
        "code_version": __version__,
        "spec": agg.spec.to_dict(),
        **agg.metadata,
    }
    sidecar_path(csv_path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return csv_path


def _parse_float(text: str, line_no: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ValueError(
            f"line {line_no}: column {column!r} is not a number: {text!r}"
        ) from None


def _parse_int(text: str, line_no: int, column: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValueError(
            f"line {line_no}: column {column!r} is not an integer: {text!r}"
        ) from None


def read_aggregate(csv_path) -> EnsembleAggregate:
    """Load an aggregate written by :func:`write_aggregate`.

    Raises ``FileNotFoundError`` when the sidecar is missing and
    ``ValueError`` (naming line and column) for malformed rows.
    """
    csv_path = Path(csv_path)
    meta_path = sidecar_path(csv_path)
    if not csv_path.exists():
        raise FileNotFoundError(f"aggregate CSV not found: {csv_path}")
    if not meta_path.exists():
        raise FileNotFoundError(
            f"metadata missing for {csv_path}: expected sidecar {meta_path}"
        )
    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as e:
        raise ValueError(f"corrupt metadata sidecar {meta_path}: {e}") from None
    if meta.get("format") != "miptkz-aggregate-v1":
        raise ValueError(
            f"{meta_path}: unknown format {meta.get('format')!r}, "
            "expected 'miptkz-aggregate-v1'"
        )
    spec = RunSpec.from_dict(meta["spec"])

    text = csv_path.read_text()
    lines = text.splitlines()
    if not lines or lines[0].strip() != CSV_HEADER:
        raise ValueError(
            f"{csv_path}: line 1: bad header {lines[0]!r} "
            f"(expected {CSV_HEADER!r})" if lines else f"{csv_path}: empty file"
        )
    cols = CSV_HEADER.split(",")
    points = {}  # (t,p,g) -> {key: (mean, sem)}
    order = []
    n_traj = None
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(cols):
            raise ValueError(
                f"{csv_path}: line {line_no}: expected {len(cols)} fields, got {len(parts)}"
            )
        t = _parse_float(parts[0], line_no, "t")
        p = _parse_float(parts[1], line_no, "p")
        g = _parse_float(parts[2], line_no, "g")
        name = parts[3]
        size = _parse_int(parts[4], line_no, "region_size")
        mean = _parse_float(parts[5], line_no, "mean")
        sem = _parse_float(parts[6], line_no, "sem")
        n = _parse_int(parts[7], line_no, "n_traj")
        if n_traj is None:
            n_traj = n
        elif n != n_traj:
            raise ValueError(
                f"{csv_path}: line {line_no}: n_traj changed from {n_traj} to {n}"
            )
        pt = (t, p, g)
        if pt not in points:
            points[pt] = {}
            order.append(pt)
        points[pt][(name, size)] = (mean, sem)

    if not order:
        raise ValueError(f"{csv_path}: no data rows")
    # Keys in first-appearance order; a point missing a key (mixed
    # readout granularities) becomes a NaN hole, mirroring run_ensemble.
    keys = []
    for pt in order:
        for k in points[pt]:
            if k not in keys:
                keys.append(k)
    hole = (float("nan"), float("nan"))
    t = np.array([pt[0] for pt in order])
    p = np.array([pt[1] for pt in order])
    g = np.array([pt[2] for pt in order])
    mean = np.array([[points[pt].get(k, hole)[0] for k in keys] for pt in order])
    sem = np.array([[points[pt].get(k, hole)[1] for k in keys] for pt in order])
    metadata = {k: v for k, v in meta.items() if k not in ("format", "spec")}
    return EnsembleAggregate(
        spec=spec, t=t, p=p, g=g, keys=keys, mean=mean, sem=sem,
        n_traj=int(n_traj), metadata=metadata,
    )
