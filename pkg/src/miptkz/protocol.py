"""Brick-wall hybrid Clifford circuit with a driven measurement rate.

One time unit is two half-steps on a periodic chain of ``L`` sites
(``L`` even).  Each half-step applies fresh uniformly-random two-qubit
Cliffords on one bond sublayer and then a measurement layer in which
every site is measured in Z independently with probability ``p``:

* half-step A: bonds ``(0,1), (2,3), ...`` at rate ``p(t)``;
* half-step B: bonds ``(1,2), (3,4), ..., (L-1,0)`` at rate ``p(t+1/2)``.

``measure_before_unitaries`` flips the order of the two layers inside a
half-step.  The measurement rate follows either a constant drive or a
linear ramp ``p(t) = p_c +- rate*(t - t_c)`` that starts from ``p0`` and
stops at ``p_end``.

RNG discipline: a single ``numpy.random.Generator`` (PCG64) is consumed
in a fixed order per half-step -- ``L/2`` gate indices, ``L`` site
uniforms, then one pre-drawn outcome bit per selected site.  Every draw
count depends only on the drawn uniforms, never on the quantum state, so
the gate/measurement pattern on system sites is bit-identical whether or
not an ancilla is attached.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .clifford import GROUP_ORDER, enumerate_2q_group
from .observables import (
    ancilla_entropy,
    entanglement_entropy,
    half_chain_entropy,
    tripartite_mutual_information,
)
from .tableau import Tableau, new_zero_state

__all__ = [
    "CircuitConfig",
    "ConstantDrive",
    "LinearRamp",
    "TrajectorySample",
    "OBSERVABLE_NAMES",
    "evolve_one_time_unit",
    "prepare_steady_state",
    "attach_ancilla",
    "run_trajectory",
    "decimal_grid",
]

DEFAULT_P_C = 0.15995
DEFAULT_SPACING = 0.005

OBSERVABLE_NAMES = ("S_half", "S_region", "I3", "S_Q")

_EPS = 1e-12


@dataclass(frozen=True)
class CircuitConfig:
    """Geometry and layer-order conventions (boundaries are periodic and
    the bond sublayer order is fixed; only the unitary/measurement order
    within a half-step is switchable)."""

    L: int
    measure_before_unitaries: bool = False

    def __post_init__(self):
        if self.L < 4 or self.L % 2:
            raise ValueError(f"L must be even and >= 4, got {self.L}")


@dataclass(frozen=True)
class ConstantDrive:
    """Time-independent measurement rate."""

    p: float
    p_c: float = DEFAULT_P_C

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p={self.p} outside [0, 1]")

    @property
    def initial_p(self) -> float:
        return self.p

    def p_at(self, t: float) -> float:
        return self.p


@dataclass(frozen=True)
class LinearRamp:
    """Linear drive of the measurement rate through the transition.

    ``from_area`` ramps down from ``p0 > p_c`` (area-law start),
    ``from_volume`` ramps up from ``p0 < p_c``.  ``p_end`` defaults to
    the mirror point ``2*p_c - p0``.
    """

    p0: float
    rate: float
    direction: str
    p_c: float = DEFAULT_P_C
    p_end: float | None = None

    def __post_init__(self):
        if self.direction not in ("from_area", "from_volume"):
            raise ValueError(
                f"direction must be 'from_area' or 'from_volume', got {self.direction!r}"
            )
        if self.rate <= 0:
            raise ValueError(f"ramp rate must be positive, got {self.rate}")
        if not 0.0 <= self.p0 <= 1.0:
            raise ValueError(f"p0={self.p0} outside [0, 1]")
        if self.direction == "from_area" and self.p0 <= self.p_c:
            raise ValueError(
                f"from_area needs p0 > p_c, got p0={self.p0}, p_c={self.p_c}"
            )
        if self.direction == "from_volume" and self.p0 >= self.p_c:
            raise ValueError(
                f"from_volume needs p0 < p_c, got p0={self.p0}, p_c={self.p_c}"
            )
        if self.p_end is None:
            object.__setattr__(self, "p_end", 2.0 * self.p_c - self.p0)
        if not 0.0 <= self.p_end <= 1.0:
            raise ValueError(f"p_end={self.p_end} outside [0, 1]")
        if self.direction == "from_area" and self.p_end > self.p_c:
            raise ValueError(
                f"from_area ramp must end at or past p_c: p_end={self.p_end} > p_c={self.p_c}"
            )
        if self.direction == "from_volume" and self.p_end < self.p_c:
            raise ValueError(
                f"from_volume ramp must end at or past p_c: p_end={self.p_end} < p_c={self.p_c}"
            )

    @property
    def initial_p(self) -> float:
        return self.p0

    @property
    def t_c(self) -> float:
        """Time at which the ramp reaches p_c (may lie past p_end)."""
        return abs(self.p0 - self.p_c) / self.rate

    @property
    def duration(self) -> float:
        return abs(self.p_end - self.p0) / self.rate

    def p_at(self, t: float) -> float:
        if self.direction == "from_area":
            return max(self.p_end, self.p0 - self.rate * t)
        return min(self.p_end, self.p0 + self.rate * t)


@dataclass(frozen=True)
class TrajectorySample:
    """Observables of one trajectory at one sample point.  Keys of
    ``values`` are ``(observable, region_size)`` with region_size 0 when
    not applicable."""

    t: float
    p: float
    g: float
    values: dict = field(compare=False)


def decimal_grid(p_start: float, p_stop: float, spacing: float) -> np.ndarray:
    """Grid of rates from p_start towards p_stop in steps of ``spacing``,
    built in integer 1e-8 units so equal decimals from different runs are
    bit-identical floats.  The grid always contains p_start and never
    oversteps p_stop."""
    if spacing <= 0:
        raise ValueError(f"grid spacing must be positive, got {spacing}")
    a = round(p_start * 1e8)
    b = round(p_stop * 1e8)
    s = round(spacing * 1e8)
    if s == 0:
        raise ValueError(f"grid spacing {spacing} below 1e-8 resolution")
    n = abs(b - a) // s
    sign = 1 if b >= a else -1
    return np.array([(a + sign * k * s) / 1e8 for k in range(n + 1)], float)


def _rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(int(seed))


def _half_step(state, config, p, rng, sublayer, group, trace):
    """One unitary sublayer plus one measurement layer at rate ``p``."""
    L = config.L
    start = 0 if sublayer == 0 else 1
    qa = np.arange(start, L, 2, dtype=np.int64)
    qb = (qa + 1) % L

    def unitaries():
        idx = rng.integers(0, GROUP_ORDER, size=qa.size).astype(np.int64)
        kernels.apply_gates(
            state.x, state.z, state.r, qa, qb, idx, group.bits_tbl, group.phase_tbl
        )
        return idx

    def measurements():
        u = rng.random(L)
        sites = np.nonzero(u < p)[0].astype(np.int64)
        bits = rng.integers(0, 2, size=sites.size, dtype=np.uint8)
        values, was_random = state.measure_many(sites, bits)
        return sites, values, was_random

    if config.measure_before_unitaries:
        sites, values, was_random = measurements()
        idx = unitaries()
    else:
        idx = unitaries()
        sites, values, was_random = measurements()
    if trace is not None:
        trace.append(
            {
                "sublayer": sublayer,
                "p": p,
                "gates": idx,
                "sites": sites,
                "values": values,
                "was_random": was_random,
            }
        )


def evolve_one_time_unit(
    state: Tableau,
    config: CircuitConfig,
    p_first: float,
    p_second: float,
    rng: np.random.Generator,
    group=None,
    trace=None,
) -> None:
    """Advance one time unit: half-step A at rate ``p_first``, half-step B
    at rate ``p_second``.  An attached ancilla (qubit index >= L) idles."""
    if group is None:
        group = enumerate_2q_group()
    for p in (p_first, p_second):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"measurement rate {p} outside [0, 1]")
    _half_step(state, config, p_first, rng, 0, group, trace)
    _half_step(state, config, p_second, rng, 1, group, trace)


def prepare_steady_state(
    config: CircuitConfig,
    p0: float,
    T_eq: int,
    rng,
    group=None,
    trace=None,
) -> Tableau:
    """Evolve |0...0> for ``T_eq`` time units at constant rate ``p0``."""
    if T_eq < 1:
        raise ValueError(f"T_eq must be >= 1, got {T_eq}")
    if not 0.0 <= p0 <= 1.0:
        raise ValueError(f"p0={p0} outside [0, 1]")
    if group is None:
        group = enumerate_2q_group()
    rng = _rng_from(rng)
    state = new_zero_state(config.L)
    for _ in range(int(T_eq)):
        evolve_one_time_unit(state, config, p0, p0, rng, group, trace)
    return state


def attach_ancilla(state: Tableau, site: int) -> int:
    """Append a reference qubit maximally entangled with ``site`` (H on
    the ancilla, then CNOT ancilla -> site); returns the ancilla index.

    No fixed coupling gate entangles for every local state of the target:
    H+CNOT acts trivially when the site is an X eigenstate.  In that one
    case the site is rotated into the Z basis (a local unitary, so no
    entanglement measure changes) and the coupling is repeated.  The fix-up
    consumes no randomness, so trajectory RNG streams stay aligned.
    """
    if not 0 <= site < state.n:
        raise ValueError(f"site {site} out of range for n={state.n}")
    anc = state.append_qubit()
    state.apply_fixture_gate("H", anc)
    state.apply_fixture_gate("CNOT", anc, site)
    if ancilla_entropy(state, anc) == 0:
        state.apply_fixture_gate("H", site)
        state.apply_fixture_gate("CNOT", anc, site)
    return anc


def _validate_observables(observables, region_sizes, L):
    observables = tuple(observables)
    for name in observables:
        if name not in OBSERVABLE_NAMES:
            raise ValueError(
                f"unknown observable {name!r}; expected one of {OBSERVABLE_NAMES}"
            )
    if "S_region" in observables and not region_sizes:
        raise ValueError("observable S_region requires region_sizes")
    for size in region_sizes:
        if not 1 <= size < L:
            raise ValueError(f"region size {size} out of range for L={L}")
    if "S_half" in observables and L % 2:
        raise ValueError("S_half needs even L")
    if "I3" in observables and L % 4:
        raise ValueError("I3 needs L divisible by 4")
    return observables


def _evaluate(state, L, observables, region_sizes):
    values = {}
    for name in observables:
        if name == "S_half":
            values[("S_half", L // 2)] = float(half_chain_entropy(state, L))
        elif name == "I3":
            values[("I3", 0)] = float(tripartite_mutual_information(state, L))
        elif name == "S_Q":
            values[("S_Q", 0)] = float(ancilla_entropy(state))
        else:
            for size in region_sizes:
                values[("S_region", size)] = float(
                    entanglement_entropy(state, np.arange(size, dtype=np.int64))
                )
    return values


def run_trajectory(
    config: CircuitConfig,
    schedule,
    seed,
    observables=("S_half",),
    region_sizes=(),
    T_eq: int | None = None,
    prep_p: float | None = None,
    sample_grid=None,
    ancilla_site: int | None = None,
    group=None,
) -> list[TrajectorySample]:
    """Run one quantum trajectory and sample observables.

    The state is first equilibrated for ``T_eq`` time units (default
    ``2L``) at constant rate ``prep_p`` (default: the drive's own starting
    rate; pass a different value for a quenched start).  If ``S_Q`` is
    requested, an ancilla is entangled with site ``L//2`` (or
    ``ancilla_site``) after preparation, right before the drive starts.

    For ramps, ``sample_grid`` is a grid of rates (default: every 0.005
    from ``p0`` to ``p_end``), so runs at different rates share abscissae.
    Each grid value is read at the readout boundary nearest the time the
    drive crosses it (ties to the earlier boundary; values crossed before
    the first boundary's window are read from the equilibrated state at
    t = 0), so the labeled rate leads or lags the applied rate by at most
    half a boundary spacing's sweep.  Cut-based entropies (``S_half``,
    ``S_region``, ``I3``) are read only at full-period boundaries: only
    every other sublayer couples across a given cut, so half-period
    readout would dress them with a systematic sublattice zigzag.  The
    ancilla entropy ``S_Q`` has no spatial cut (system unitaries cannot
    change it) and is read at every half period, which keeps fast ramps
    resolved.  A run mixing the two classes records each observable on
    its own boundaries (the aggregate table is long-format, so per-class
    sample times coexist).  For constant drives, ``sample_grid`` is a
    list of times in units of one brick-wall period (multiples of 1/2;
    0 samples right after preparation; half-integer times interleave the
    two sublattice phases and show that zigzag in cut-based entropies).
    """
    observables = _validate_observables(observables, region_sizes, config.L)
    if group is None:
        group = enumerate_2q_group()
    rng = _rng_from(seed)
    if T_eq is None:
        T_eq = 2 * config.L
    if prep_p is None:
        prep_p = schedule.initial_p
    L = config.L

    state = new_zero_state(L)
    for _ in range(int(T_eq)):
        evolve_one_time_unit(state, config, prep_p, prep_p, rng, group)

    if "S_Q" in observables:
        site = L // 2 if ancilla_site is None else ancilla_site
        attach_ancilla(state, site)

    samples: list[TrajectorySample] = []

    if isinstance(schedule, ConstantDrive):
        if sample_grid is None:
            raise ValueError("constant drives need an explicit time sample_grid")
        times = np.asarray(sorted(float(t) for t in sample_grid))
        if times.size == 0:
            raise ValueError("sample_grid is empty")
        if times[0] < 0:
            raise ValueError("sample times must be >= 0")
        if np.any(np.abs(times * 2 - np.round(times * 2)) > _EPS):
            raise ValueError("sample times must be multiples of 1/2")
        half_steps = int(round(times[-1] * 2))
        ti = 0
        g = schedule.p - schedule.p_c
        while ti < times.size and abs(times[ti]) < _EPS:
            samples.append(
                TrajectorySample(0.0, schedule.p, g, _evaluate(state, L, observables, region_sizes))
            )
            ti += 1
        for k in range(half_steps):
            _half_step(state, config, schedule.p, rng, k & 1, group, None)
            t_now = (k + 1) / 2
            while ti < times.size and times[ti] <= t_now + _EPS:
                samples.append(
                    TrajectorySample(
                        t_now, schedule.p, g, _evaluate(state, L, observables, region_sizes)
                    )
                )
                ti += 1
        return samples

    # linear ramp
    if sample_grid is None:
        grid = decimal_grid(schedule.p0, schedule.p_end, DEFAULT_SPACING)
    else:
        grid = np.asarray([float(v) for v in sample_grid])
        lo = min(schedule.p0, schedule.p_end) - _EPS
        hi = max(schedule.p0, schedule.p_end) + _EPS
        if np.any(grid < lo) or np.any(grid > hi):
            raise ValueError("sample_grid values must lie between p0 and p_end")
        down = schedule.direction == "from_area"
        grid = np.sort(grid)[::-1] if down else np.sort(grid)
    down = schedule.direction == "from_area"
    # Entropies of fixed regions are read only at full-period boundaries:
    # only every other sublayer has gates across a given cut, so half-period
    # readout would dress them with a systematic sublattice zigzag.  The
    # ancilla entropy has no spatial cut (system unitaries cannot change it,
    # only measurement layers can), so it is read at every half period,
    # which keeps fast ramps resolved.
    cut_obs = tuple(o for o in observables if o != "S_Q")
    anc_obs = tuple(o for o in observables if o == "S_Q")

    def _emit(gi: int, obs: tuple, t_boundary: float, half_window: float) -> int:
        # A grid value is read at the boundary nearest the time the drive
        # crosses it (ties resolve to the earlier boundary), so the labeled
        # rate leads or lags the applied rate by at most ``half_window``'s
        # sweep.  Values crossed within the first half window are read from
        # the prepared steady state at t = 0.
        edge = schedule.p_at(t_boundary + half_window)
        while gi < grid.size:
            v = float(grid[gi])
            due = v >= edge - _EPS if down else v <= edge + _EPS
            if not due:
                break
            samples.append(
                TrajectorySample(
                    t_boundary, v, v - schedule.p_c, _evaluate(state, L, obs, region_sizes)
                )
            )
            gi += 1
        return gi

    gi_cut = _emit(0, cut_obs, 0.0, 0.5) if cut_obs else grid.size
    gi_anc = _emit(0, anc_obs, 0.0, 0.25) if anc_obs else grid.size
    max_units = int(np.ceil(schedule.duration)) + 2
    for unit in range(max_units):
        if gi_cut >= grid.size and gi_anc >= grid.size:
            break
        _half_step(state, config, schedule.p_at(float(unit)), rng, 0, group, None)
        if gi_anc < grid.size:
            gi_anc = _emit(gi_anc, anc_obs, unit + 0.5, 0.25)
        _half_step(state, config, schedule.p_at(unit + 0.5), rng, 1, group, None)
        t_now = float(unit + 1)
        if gi_cut < grid.size:
            gi_cut = _emit(gi_cut, cut_obs, t_now, 0.5)
        if gi_anc < grid.size:
            gi_anc = _emit(gi_anc, anc_obs, t_now, 0.25)
    if gi_cut < grid.size or gi_anc < grid.size:
        leftover = grid[min(gi_cut, gi_anc)]
        raise RuntimeError(f"ramp ended before sampling grid value {leftover!r}")
    return samples
