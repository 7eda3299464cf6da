"""Command-line front end: ``miptkz run | analyze | seedcheck``.

``run`` executes a JSON experiment config (kinds: steady_sweep,
ramp_area, ramp_volume, ancilla_ramp, i3_ramp) and writes one aggregate
CSV + sidecar per ensemble under ``<out>/<kind>/<label>.csv``.

``analyze`` executes a ``kind: analyze`` config over previously written
aggregates: rescale + collapse for the scaling modes, or the fit
operations (fit_log, fit_power_log, fit_steady_alpha), writing rescaled
CSVs and JSON reports under ``<out>/analyze/``.

``seedcheck`` runs a two-trajectory miniature of a config twice and
byte-compares the outputs (JSON sidecars modulo volatile keys); exit 0
iff identical.

Config errors exit 2 with a message naming the offending key; runtime
and fit failures exit 1.
"""

from __future__ import annotations

import argparse
import glob as globmod
import json
import os
import sys
import tempfile
from importlib import resources
from pathlib import Path

import numpy as np

from .analysis import (
    FitError,
    ScalingConstants,
    asymptote_check,
    fit_log,
    fit_power_log,
    fit_steady_alpha,
    ramp_curve,
    rescale_fts,
    write_collapse,
    write_fit_report,
    RESCALE_MODES,
)
from .ensemble import (
    VOLATILE_METADATA_KEYS,
    RunSpec,
    read_aggregate,
    run_ensemble,
    trajectory_seed,
    write_aggregate,
)
from .protocol import ConstantDrive, LinearRamp, decimal_grid

__all__ = ["main", "ConfigError", "load_config", "build_specs", "compare_trees"]

DEFAULT_SPACING = 0.005

RUN_KINDS = ("steady_sweep", "ramp_area", "ramp_volume", "ancilla_ramp", "i3_ramp")
ALL_KINDS = RUN_KINDS + ("analyze",)

_COMMON_KEYS = {
    "kind",
    "label",
    "n_traj",
    "master_seed",
    "observables",
    "region_sizes",
    "T_eq",
    "prep_p",
    "measure_before_unitaries",
    "constants",
    "paper_scale",
}
ALLOWED_KEYS = {
    "steady_sweep": _COMMON_KEYS | {"L", "p_grid", "p_list", "sample_times"},
    "ramp_area": _COMMON_KEYS
    | {"L", "p0", "p_end", "R_list", "A_list", "product_RAr", "L_list", "product_RLr",
       "sample_spacing", "sample_grid"},
    "ramp_volume": _COMMON_KEYS
    | {"L", "p0", "p_end", "R_list", "A_list", "product_RAr", "L_list", "product_RLr",
       "sample_spacing", "sample_grid"},
    "ancilla_ramp": _COMMON_KEYS
    | {"L", "L_list", "p0", "p_end", "direction", "R_list", "product_RLr",
       "sample_spacing", "sample_grid", "ancilla_site"},
    "i3_ramp": _COMMON_KEYS
    | {"L", "L_list", "p0_area", "p0_volume", "directions", "R_list", "product_RLr",
       "sample_spacing", "sample_grid"},
    "analyze": {
        "kind", "label", "inputs", "mode", "observable", "region_size",
        "window", "constants", "asymptote", "paper_scale",
    },
}

FIT_MODES = ("fit_log", "fit_power_log", "fit_steady_alpha")


class ConfigError(ValueError):
    """Invalid experiment configuration (exit code 2)."""


def _preset_path(name: str):
    pkg = resources.files("miptkz").joinpath("presets", f"{name}.json")
    return pkg if pkg.is_file() else None


def load_config(path_or_name: str) -> dict:
    """Load a config from a JSON file path or a bundled preset name."""
    p = Path(path_or_name)
    if p.is_file():
        text = p.read_text()
    else:
        preset = _preset_path(path_or_name)
        if preset is None:
            raise ConfigError(
                f"config {path_or_name!r} is neither a file nor a bundled preset"
            )
        text = preset.read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path_or_name!r} is not valid JSON: {e}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _parse_set(values) -> dict:
    out = {}
    for item in values or ():
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, _, raw = item.partition("=")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def effective_config(cfg: dict, paper_scale: bool, overrides: dict) -> dict:
    cfg = dict(cfg)
    if paper_scale:
        if "paper_scale" not in cfg:
            raise ConfigError("--paper-scale given but config has no 'paper_scale' key")
        scale = cfg["paper_scale"]
        if not isinstance(scale, dict):
            raise ConfigError("'paper_scale' must be an object of overrides")
        cfg.update(scale)
    cfg.pop("paper_scale", None)
    cfg.update(overrides)
    return cfg


def _validate_keys(cfg: dict):
    kind = cfg.get("kind")
    if kind not in ALL_KINDS:
        raise ConfigError(f"key 'kind' must be one of {ALL_KINDS}, got {kind!r}")
    allowed = ALLOWED_KEYS[kind]
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} for kind {kind!r}")
    return kind


def _require(cfg: dict, key: str):
    if key not in cfg or cfg[key] is None:
        raise ConfigError(f"kind {cfg.get('kind')!r} requires key {key!r}")
    return cfg[key]


def _as_int(cfg: dict, key: str, value=None):
    value = _require(cfg, key) if value is None else value
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"key {key!r} must be an integer, got {value!r}") from None


def _as_float(cfg: dict, key: str, value=None):
    value = _require(cfg, key) if value is None else value
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"key {key!r} must be a number, got {value!r}") from None


def _constants(cfg: dict) -> ScalingConstants:
    over = cfg.get("constants") or {}
    if not isinstance(over, dict):
        raise ConfigError("'constants' must be an object")
    known = {"p_c", "nu", "z", "alpha"}
    unknown = sorted(set(over) - known)
    if unknown:
        raise ConfigError(f"unknown constants key(s) {unknown}")
    try:
        return ScalingConstants(**over)
    except ValueError as e:
        raise ConfigError(f"constants: {e}") from None


def _ramp_grid(cfg: dict, schedule: LinearRamp) -> tuple:
    if cfg.get("sample_grid") is not None:
        return tuple(float(v) for v in cfg["sample_grid"])
    spacing = float(cfg.get("sample_spacing", DEFAULT_SPACING))
    return tuple(decimal_grid(schedule.p0, schedule.p_end, spacing))


def _spec_common(cfg: dict) -> dict:
    return {
        "n_traj": _as_int(cfg, "n_traj"),
        "T_eq": cfg.get("T_eq"),
        "prep_p": cfg.get("prep_p"),
        "measure_before_unitaries": bool(cfg.get("measure_before_unitaries", False)),
    }


def build_specs(cfg: dict) -> list:
    """Expand a run config into [(label, RunSpec), ...] (deterministic order)."""
    kind = _validate_keys(cfg)
    if kind == "analyze":
        raise ConfigError("kind 'analyze' is handled by the analyze command, not run")
    constants = _constants(cfg)
    p_c = constants.p_c
    r_exp = constants.r
    master = _as_int(cfg, "master_seed")
    common = _spec_common(cfg)
    base_label = cfg.get("label", kind)
    specs = []

    def add(label, **kw):
        seed = trajectory_seed(master, len(specs))
        try:
            specs.append((f"{base_label}_{label}", RunSpec(master_seed=seed, **common, **kw)))
        except ValueError as e:
            raise ConfigError(f"{base_label}_{label}: {e}") from None

    if kind == "steady_sweep":
        L = _as_int(cfg, "L")
        if "p_list" in cfg and cfg["p_list"] is not None:
            p_values = [float(p) for p in cfg["p_list"]]
        else:
            grid = _require(cfg, "p_grid")
            for key in ("start", "stop", "step"):
                if key not in grid:
                    raise ConfigError(f"'p_grid' requires key {key!r}")
            p_values = decimal_grid(grid["start"], grid["stop"], grid["step"]).tolist()
        times = tuple(cfg.get("sample_times", (0.0,)))
        observables = tuple(_require(cfg, "observables"))
        for p in p_values:
            add(
                f"p{p:g}",
                L=L,
                schedule=ConstantDrive(p=p, p_c=p_c),
                observables=observables,
                region_sizes=tuple(cfg.get("region_sizes", ())),
                sample_grid=times,
            )
        return specs

    if kind in ("ramp_area", "ramp_volume"):
        direction = "from_area" if kind == "ramp_area" else "from_volume"
        p0 = _as_float(cfg, "p0")
        observables = tuple(_require(cfg, "observables"))
        region_sizes = tuple(cfg.get("region_sizes", ()))

        def ramp(R):
            try:
                return LinearRamp(
                    p0=p0, rate=float(R), direction=direction, p_c=p_c,
                    p_end=cfg.get("p_end"),
                )
            except ValueError as e:
                raise ConfigError(f"kind {kind!r}: {e}") from None

        for R in cfg.get("R_list") or ():
            sched = ramp(R)
            add(
                f"R{float(R):g}",
                L=_as_int(cfg, "L"),
                schedule=sched,
                observables=observables,
                region_sizes=region_sizes,
                sample_grid=_ramp_grid(cfg, sched),
            )
        if cfg.get("product_RAr") is not None:
            product = float(cfg["product_RAr"])
            for A in _require(cfg, "A_list"):
                R = product / float(A) ** r_exp
                sched = ramp(R)
                add(
                    f"A{int(A)}_R{R:.6g}",
                    L=_as_int(cfg, "L"),
                    schedule=sched,
                    observables=("S_region",),
                    region_sizes=(int(A),),
                    sample_grid=_ramp_grid(cfg, sched),
                )
        if cfg.get("product_RLr") is not None:
            product = float(cfg["product_RLr"])
            for L in _require(cfg, "L_list"):
                R = product / float(L) ** r_exp
                sched = ramp(R)
                add(
                    f"L{int(L)}_R{R:.6g}",
                    L=int(L),
                    schedule=sched,
                    observables=observables,
                    region_sizes=region_sizes,
                    sample_grid=_ramp_grid(cfg, sched),
                )
        if not specs:
            raise ConfigError(
                f"kind {kind!r} needs 'R_list', 'product_RAr' + 'A_list', "
                "or 'product_RLr' + 'L_list'"
            )
        return specs

    if kind == "ancilla_ramp":
        direction = cfg.get("direction", "from_volume")
        if direction not in ("from_area", "from_volume"):
            raise ConfigError(f"key 'direction' must be from_area or from_volume, got {direction!r}")
        p0 = _as_float(cfg, "p0")
        observables = tuple(cfg.get("observables", ("S_Q",)))

        def pairs():
            if cfg.get("product_RLr") is not None:
                product = float(cfg["product_RLr"])
                for L in _require(cfg, "L_list"):
                    yield int(L), product / float(L) ** r_exp
            elif cfg.get("R_list") is not None:
                L = _as_int(cfg, "L")
                for R in cfg["R_list"]:
                    yield L, float(R)
            else:
                raise ConfigError(
                    "kind 'ancilla_ramp' needs 'product_RLr' + 'L_list' or 'L' + 'R_list'"
                )

        for L, R in pairs():
            try:
                sched = LinearRamp(p0=p0, rate=R, direction=direction, p_c=p_c,
                                   p_end=cfg.get("p_end"))
            except ValueError as e:
                raise ConfigError(f"kind 'ancilla_ramp': {e}") from None
            add(
                f"L{L}_R{R:.6g}",
                L=L,
                schedule=sched,
                observables=observables,
                region_sizes=tuple(cfg.get("region_sizes", ())),
                sample_grid=_ramp_grid(cfg, sched),
                ancilla_site=cfg.get("ancilla_site"),
            )
        return specs

    # i3_ramp
    directions = tuple(cfg.get("directions", ("from_volume", "from_area")))
    for d in directions:
        if d not in ("from_area", "from_volume"):
            raise ConfigError(f"'directions' entries must be from_area/from_volume, got {d!r}")
    observables = tuple(cfg.get("observables", ("I3",)))

    def pairs():
        if cfg.get("product_RLr") is not None:
            product = float(cfg["product_RLr"])
            for L in _require(cfg, "L_list"):
                yield int(L), product / float(L) ** r_exp
        elif cfg.get("R_list") is not None:
            L = int(_require(cfg, "L"))
            for R in cfg["R_list"]:
                yield L, float(R)
        else:
            raise ConfigError("kind 'i3_ramp' needs 'product_RLr' + 'L_list' or 'L' + 'R_list'")

    for direction in directions:
        p0_key = "p0_area" if direction == "from_area" else "p0_volume"
        p0 = float(cfg.get(p0_key, 0.30995 if direction == "from_area" else 0.00995))
        for L, R in pairs():
            try:
                sched = LinearRamp(p0=p0, rate=R, direction=direction, p_c=p_c,
                                   p_end=cfg.get("p_end"))
            except ValueError as e:
                raise ConfigError(f"kind 'i3_ramp' ({direction}): {e}") from None
            add(
                f"{direction}_L{L}_R{R:.6g}",
                L=L,
                schedule=sched,
                observables=observables,
                sample_grid=_ramp_grid(cfg, sched),
            )
    return specs


def cmd_run(args) -> int:
    cfg = effective_config(
        load_config(args.config), args.paper_scale, _parse_set(args.set)
    )
    if args.seed is not None:
        cfg["master_seed"] = args.seed
    specs = build_specs(cfg)
    out = Path(args.out) / cfg["kind"]
    for label, spec in specs:
        agg = run_ensemble(spec, workers=args.workers, progress=args.progress)
        agg.metadata["experiment"] = cfg
        path = write_aggregate(agg, out / f"{label}.csv")
        print(
            f"[{cfg['kind']}] {label}: {spec.n_traj} trajectories, "
            f"{agg.t.size} sample points -> {path}"
        )
    return 0


def _slice_at_pc(aggs, observable, region_size):
    """(R, S, sem) arrays from each aggregate's sample labelled g=0.

    Reads the raw sample rows rather than ramp_curve output: the curve
    reduces readout plateaus to one representative label each, which can
    drop the g=0 row on fast ramps, while the aggregate always carries it.
    """
    from .protocol import LinearRamp

    Rs, Ss, Es = [], [], []
    for agg in aggs:
        sched = agg.spec.schedule
        if not isinstance(sched, LinearRamp):
            raise ConfigError("fit modes need aggregates driven by a LinearRamp")
        cols = agg.curve(observable, region_size)
        j = np.flatnonzero(np.abs(cols["g"]) <= 1e-9)
        if j.size == 0:
            raise ConfigError(
                f"aggregate (R={sched.rate}) has no sample at p_c (g=0)"
            )
        Rs.append(sched.rate)
        Ss.append(cols["mean"][j[0]])
        Es.append(cols["sem"][j[0]])
    sem = np.array(Es)
    return np.array(Rs), np.array(Ss), (None if np.any(np.isnan(sem)) else sem)


def cmd_analyze(args) -> int:
    cfg = effective_config(load_config(args.config), False, _parse_set(args.set))
    kind = _validate_keys(cfg)
    if kind != "analyze":
        raise ConfigError(f"analyze command needs kind 'analyze', got {kind!r}")
    mode = str(_require(cfg, "mode"))
    label = cfg.get("label", "analysis")
    constants = _constants(cfg)
    paths = []
    for pattern in _require(cfg, "inputs"):
        paths.extend(sorted(globmod.glob(str(pattern), recursive=True)))
    if not paths:
        raise ConfigError(f"no inputs match {cfg['inputs']!r}")
    aggs = [read_aggregate(p) for p in paths]
    out = Path(args.out) / "analyze"
    out.mkdir(parents=True, exist_ok=True)

    if mode in FIT_MODES:
        observable = _require(cfg, "observable")
        if mode == "fit_steady_alpha":
            if len(aggs) != 1:
                raise ConfigError(
                    f"fit_steady_alpha needs exactly one input, got {len(aggs)}"
                )
            agg = aggs[0]
            sizes = sorted(s for (name, s) in agg.keys if name == "S_region")
            if not sizes:
                raise ConfigError("input has no S_region columns")
            S = [float(agg.curve("S_region", s)["mean"][0]) for s in sizes]
            sem = [float(agg.curve("S_region", s)["sem"][0]) for s in sizes]
            fit = fit_steady_alpha(np.array(sizes, float), np.array(S),
                                   np.array(sem) if all(e > 0 for e in sem) else None)
        else:
            R, S, sem = _slice_at_pc(aggs, observable, cfg.get("region_size"))
            window = cfg.get("window")
            if isinstance(window, list):
                window = tuple(window)
            if mode == "fit_log":
                fit = fit_log(R, S, sem, window=window)
            else:
                fit = fit_power_log(R, S, sem, window=window, constants=constants)
        path = write_fit_report(fit, out / f"{label}.fit.json", constants)
        print(f"[analyze] {label}: {mode} params={fit.params} -> {path}")
        return 0

    if mode.upper() not in RESCALE_MODES:
        raise ConfigError(
            f"key 'mode' must be a rescale mode {RESCALE_MODES} or fit {FIT_MODES}, got {mode!r}"
        )
    observable = _require(cfg, "observable")
    curves = [ramp_curve(a, observable, cfg.get("region_size")) for a in aggs]
    result = rescale_fts(curves, constants, mode.upper())
    csv_path, report_path = write_collapse(result, out / label)
    msg = f"[analyze] {label}: mode={result.mode} quality={result.quality}"
    if result.unrescaled_quality is not None:
        msg += f" (unrescaled {result.unrescaled_quality})"
    if cfg.get("asymptote"):
        fit = asymptote_check(result, cfg["asymptote"], constants)
        fit_path = write_fit_report(fit, out / f"{label}.asymptote.json", constants)
        msg += f"; asymptote {cfg['asymptote']}: {fit.params}"
        paths.append(str(fit_path))
    print(msg + f" -> {csv_path}")
    return 0


def _canonical_json_bytes(path: Path) -> bytes:
    data = json.loads(path.read_text())
    if isinstance(data, dict):
        for key in VOLATILE_METADATA_KEYS:
            data.pop(key, None)
    return (json.dumps(data, indent=2, sort_keys=True) + "\n").encode()


def compare_trees(dir1, dir2) -> tuple[bool, str]:
    """Byte-compare two output trees; JSON files are compared after
    dropping volatile metadata keys.  Returns (identical, message)."""
    dir1, dir2 = Path(dir1), Path(dir2)
    files1 = sorted(p.relative_to(dir1) for p in dir1.rglob("*") if p.is_file())
    files2 = sorted(p.relative_to(dir2) for p in dir2.rglob("*") if p.is_file())
    if files1 != files2:
        only1 = [str(p) for p in set(files1) - set(files2)]
        only2 = [str(p) for p in set(files2) - set(files1)]
        return False, f"file sets differ (only in first: {only1}; only in second: {only2})"
    for rel in files1:
        p1, p2 = dir1 / rel, dir2 / rel
        if rel.suffix == ".json":
            b1, b2 = _canonical_json_bytes(p1), _canonical_json_bytes(p2)
        else:
            b1, b2 = p1.read_bytes(), p2.read_bytes()
        if b1 != b2:
            n = min(len(b1), len(b2))
            offset = next((i for i in range(n) if b1[i] != b2[i]), n)
            return False, f"{rel}: first difference at byte {offset}"
    return True, f"{len(files1)} files identical"


def cmd_seedcheck(args) -> int:
    cfg = effective_config(load_config(args.config), False, _parse_set(args.set))
    cfg["n_traj"] = 2
    if args.seed is not None:
        cfg["master_seed"] = args.seed
    specs = build_specs(cfg)
    out = Path(args.out) if args.out else Path(tempfile.mkdtemp(prefix="miptkz-seedcheck-"))
    runs = [out / "run1", out / "run2"]
    if not (args.reuse and all(d.is_dir() for d in runs)):
        for d in runs:
            for label, spec in specs:
                agg = run_ensemble(spec, workers=args.workers)
                write_aggregate(agg, d / f"{label}.csv")
    ok, msg = compare_trees(runs[0], runs[1])
    if ok:
        print(f"seedcheck OK: {msg}")
        return 0
    print(f"seedcheck FAILED: {msg}", file=sys.stderr)
    return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="miptkz",
        description="Driven hybrid Clifford circuits: ensembles, scaling analysis, reproducibility checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, workers=True):
        p.add_argument("--config", required=True,
                       help="JSON config path or bundled preset name (fig2, fig3, fig4, figS3, figS4)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a top-level config key (JSON-parsed value); repeatable")
        if workers:
            p.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                           help="worker processes (default: all cores)")

    run_p = sub.add_parser("run", help="execute a simulation config")
    common(run_p)
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--seed", type=int, default=None, help="override master_seed")
    run_p.add_argument("--paper-scale", action="store_true",
                       help="apply the config's paper_scale overrides (full-size runs)")
    run_p.add_argument("--progress", action="store_true", help="print trajectory progress")
    run_p.set_defaults(func=cmd_run)

    an_p = sub.add_parser("analyze", help="rescale/collapse/fit previously written aggregates")
    common(an_p, workers=False)
    an_p.add_argument("--out", required=True, help="output directory")
    an_p.set_defaults(func=cmd_analyze)

    sc_p = sub.add_parser("seedcheck", help="run a 2-trajectory miniature twice and diff outputs")
    common(sc_p)
    sc_p.add_argument("--out", default=None, help="directory for run1/run2 (default: temp dir)")
    sc_p.add_argument("--seed", type=int, default=None, help="override master_seed")
    sc_p.add_argument("--reuse", action="store_true",
                      help="compare existing run1/run2 under --out without re-running")
    sc_p.set_defaults(func=cmd_seedcheck)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except FitError as e:
        print(f"fit failure: {e}", file=sys.stderr)
        for d in e.diagnostics:
            print(f"  start diagnostics: {d}", file=sys.stderr)
        return 1
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
