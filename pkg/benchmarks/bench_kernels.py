#!/usr/bin/env python3
"""Benchmark the accelerated (numba) kernels against the pure-numpy
reference implementations, plus an end-to-end trajectory comparison.

Usage:
    python3 benchmarks/bench_kernels.py [--sizes 64,256,1024] [--reps 5]
    python3 benchmarks/bench_kernels.py --skip-end-to-end

The per-kernel section calls both implementations in-process (they are
selected explicitly, not via MIPTKZ_BACKEND).  The end-to-end section runs
one ramp trajectory in a subprocess per backend, because the backend of
the package itself is frozen at import time from MIPTKZ_BACKEND.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

from miptkz import kernels  # noqa: E402
from miptkz.clifford import GROUP_ORDER, enumerate_2q_group  # noqa: E402
from miptkz.tableau import new_zero_state  # noqa: E402

_END_TO_END_CHILD = """
import json, time
from miptkz import kernels
from miptkz.protocol import CircuitConfig, LinearRamp, run_trajectory

# warm up (JIT compilation happens here, outside the timed region)
run_trajectory(
    CircuitConfig(16),
    LinearRamp(p0=0.30995, rate=0.08, direction="from_area"),
    seed=1,
    observables=("S_half",),
    T_eq=1,
)
t0 = time.perf_counter()
samples = run_trajectory(
    CircuitConfig(128),
    LinearRamp(p0=0.30995, rate=0.08, direction="from_area"),
    seed=7,
    observables=("S_half", "I3"),
    T_eq=32,
)
dt = time.perf_counter() - t0
print(json.dumps({
    "backend": kernels.BACKEND,
    "seconds": dt,
    "checksum": sum(v for s in samples for v in s.values.values()),
}))
"""


def scrambled_state(n, rng, group, impl):
    """A generic stabilizer state: brick-wall of random gates on |0...0>."""
    t = new_zero_state(n)
    for layer in range(6):
        qa = np.arange(layer & 1, n - 1, 2, dtype=np.int64)
        qb = qa + 1
        idx = rng.integers(0, GROUP_ORDER, qa.size).astype(np.int64)
        impl["apply_gates"](t.x, t.z, t.r, qa, qb, idx, group.bits_tbl, group.phase_tbl)
    return t


def time_call(fn, args, reps):
    fn(*[a.copy() if isinstance(a, np.ndarray) else a for a in args])  # warm up
    best = np.inf
    for _ in range(reps):
        fresh = [a.copy() if isinstance(a, np.ndarray) else a for a in args]
        t0 = time.perf_counter()
        fn(*fresh)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(sizes, reps):
    group = enumerate_2q_group()
    impls = kernels.implementations()
    if "numba" not in impls:
        print("numba unavailable: nothing to compare", file=sys.stderr)
        return
    rows = []
    for n in sizes:
        rng = np.random.default_rng(n)
        state = scrambled_state(n, rng, group, impls["numpy"])
        qa = np.arange(0, n - 1, 2, dtype=np.int64)
        qb = qa + 1
        idx = rng.integers(0, GROUP_ORDER, qa.size).astype(np.int64)
        sites = np.sort(rng.permutation(n)[: max(1, n // 5)]).astype(np.int64)
        bits = rng.integers(0, 2, sites.size, dtype=np.uint8)
        w = state.x.shape[1]
        half = np.arange(n // 2, dtype=np.int64)

        cases = {
            "apply_gates": (
                (state.x, state.z, state.r, qa, qb, idx, group.bits_tbl, group.phase_tbl),
            ),
            "measure_sites": ((state.x, state.z, state.r, sites, bits),),
            "pack_rows": ((state.x, state.z, n, 2 * n, half),),
        }
        for name, (args,) in cases.items():
            t_np = time_call(impls["numpy"][name], args, reps)
            t_nb = time_call(impls["numba"][name], args, reps)
            rows.append((name, n, t_np, t_nb, t_np / t_nb))

        mat = impls["numpy"]["pack_rows"](state.x, state.z, n, 2 * n, half)
        args = (mat, 2 * half.size)
        t_np = time_call(impls["numpy"]["gf2_rank_words"], args, reps)
        t_nb = time_call(impls["numba"]["gf2_rank_words"], args, reps)
        rows.append(("gf2_rank_words", n, t_np, t_nb, t_np / t_nb))

    print(f"{'kernel':<16} {'n':>5} {'numpy':>12} {'numba':>12} {'speedup':>8}")
    for name, n, t_np, t_nb, speed in rows:
        print(f"{name:<16} {n:>5} {t_np * 1e6:>10.1f}us {t_nb * 1e6:>10.1f}us {speed:>7.1f}x")


def bench_end_to_end():
    print("\nend-to-end trajectory (L=128, area-side ramp, R=0.08, T_eq=32):")
    results = {}
    for backend in ("numpy", "numba"):
        env = dict(os.environ, MIPTKZ_BACKEND=backend)
        out = subprocess.run(
            [sys.executable, "-c", _END_TO_END_CHILD],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        import json

        results[backend] = json.loads(out.stdout.strip().splitlines()[-1])
        r = results[backend]
        print(f"  {backend:<6} {r['seconds']:.3f} s  (backend={r['backend']})")
    if results["numpy"]["checksum"] != results["numba"]["checksum"]:
        raise SystemExit("backends disagree on trajectory observables")
    print(
        f"  identical observables; speedup "
        f"{results['numpy']['seconds'] / results['numba']['seconds']:.1f}x"
    )


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="64,256,1024",
                    help="comma-separated chain sizes (default 64,256,1024)")
    ap.add_argument("--reps", type=int, default=5, help="repetitions per case")
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]
    bench_kernels(sizes, args.reps)
    if not args.skip_end_to_end:
        bench_end_to_end()


if __name__ == "__main__":
    main()
