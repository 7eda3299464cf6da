"""Stabilizer states as bit-packed Aaronson--Gottesman tableaus.

A state on ``n`` qubits is tracked by ``2n`` signed Pauli rows: ``n``
destabilizers followed by ``n`` stabilizers.  Masks are packed 64 qubits
per ``uint64`` word; phases live in a mod-4 accumulator that is always
0 (+1) or 2 (-1) for a valid row.  Destabilizers make single-qubit
Z measurements O(n^2) worst case.

The hot loops (gate layers, measurement sweeps) live in
:mod:`miptkz.kernels`; this module provides the object API and the cold
paths (fixture gates, validation, row extraction).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

__all__ = [
    "PauliOperator",
    "MeasurementOutcome",
    "Tableau",
    "new_zero_state",
    "symplectic_inner",
    "apply_two_qubit_clifford",
    "apply_fixture_gate",
    "measure_z",
]

_FIXTURE_ARITY = {"H": 1, "S": 1, "CNOT": 2, "SWAP": 2}


@dataclass(frozen=True)
class PauliOperator:
    """Signed n-qubit Pauli: ``phase * prod_q X_q^{x} Z_q^{z}`` with the
    Hermitian convention ``(1,1) -> Y``.  Masks are arbitrary-size ints,
    bit ``q`` = qubit ``q``."""

    n_qubits: int
    x_mask: int
    z_mask: int
    phase: int = 1

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        top = 1 << self.n_qubits
        if not (0 <= self.x_mask < top and 0 <= self.z_mask < top):
            raise ValueError("mask has bits beyond n_qubits")
        if self.phase not in (1, -1):
            raise ValueError(f"phase must be +1 or -1, got {self.phase}")

    def weight(self) -> int:
        return (self.x_mask | self.z_mask).bit_count()


@dataclass(frozen=True)
class MeasurementOutcome:
    value: int  # +1 or -1
    was_random: bool


def symplectic_inner(a: PauliOperator, b: PauliOperator) -> int:
    """0 if the Paulis commute, 1 if they anticommute."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(
            f"operator sizes differ: {a.n_qubits} vs {b.n_qubits}"
        )
    return ((a.x_mask & b.z_mask).bit_count() + (a.z_mask & b.x_mask).bit_count()) & 1


class Tableau:
    """Mutable stabilizer state.  Rows 0..n-1 destabilizers, n..2n-1
    stabilizers."""

    __slots__ = ("n", "x", "z", "r")

    def __init__(self, n: int):
        if n < 1:
            raise ValueError(f"need at least one qubit, got n={n}")
        self.n = n
        W = (n + 63) >> 6
        self.x = np.zeros((2 * n, W), np.uint64)
        self.z = np.zeros((2 * n, W), np.uint64)
        self.r = np.zeros(2 * n, np.uint8)
        one = np.uint64(1)
        for q in range(n):
            self.x[q, q >> 6] |= one << np.uint64(q & 63)
            self.z[n + q, q >> 6] |= one << np.uint64(q & 63)

    # -- bookkeeping ------------------------------------------------------

    @property
    def n_words(self) -> int:
        return self.x.shape[1]

    def copy(self) -> "Tableau":
        dup = Tableau.__new__(Tableau)
        dup.n = self.n
        dup.x = self.x.copy()
        dup.z = self.z.copy()
        dup.r = self.r.copy()
        return dup

    def fingerprint(self) -> bytes:
        return self.x.tobytes() + self.z.tobytes() + self.r.tobytes()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tableau):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
            and np.array_equal(self.r, other.r)
        )

    def _row_pauli(self, row: int) -> PauliOperator:
        xm = zm = 0
        for w in range(self.n_words):
            xm |= int(self.x[row, w]) << (64 * w)
            zm |= int(self.z[row, w]) << (64 * w)
        return PauliOperator(self.n, xm, zm, 1 if self.r[row] == 0 else -1)

    def stabilizer(self, i: int) -> PauliOperator:
        if not 0 <= i < self.n:
            raise ValueError(f"stabilizer index {i} out of range for n={self.n}")
        return self._row_pauli(self.n + i)

    def destabilizer(self, i: int) -> PauliOperator:
        if not 0 <= i < self.n:
            raise ValueError(f"destabilizer index {i} out of range for n={self.n}")
        return self._row_pauli(i)

    def to_bool_arrays(self):
        """Unpacked (X, Z, r) with X, Z boolean ``[2n, n]``."""
        X = np.unpackbits(self.x.view(np.uint8), axis=1, bitorder="little")
        Z = np.unpackbits(self.z.view(np.uint8), axis=1, bitorder="little")
        return X[:, : self.n].astype(bool), Z[:, : self.n].astype(bool), self.r.copy()

    # -- gates ------------------------------------------------------------

    def _check_qubit(self, q: int):
        if not 0 <= q < self.n:
            raise ValueError(f"qubit {q} out of range for n={self.n}")

    def apply_fixture_gate(self, name: str, *qubits: int):
        """Apply one of the fixed test gates H, S, CNOT(control, target),
        SWAP."""
        if name not in _FIXTURE_ARITY:
            raise ValueError(f"unknown fixture gate {name!r}")
        if len(qubits) != _FIXTURE_ARITY[name]:
            raise ValueError(
                f"{name} takes {_FIXTURE_ARITY[name]} qubit(s), got {len(qubits)}"
            )
        for q in qubits:
            self._check_qubit(q)
        one = np.uint64(1)
        if name in ("H", "S"):
            (q,) = qubits
            w, b = q >> 6, np.uint64(q & 63)
            xb = (self.x[:, w] >> b) & one
            zb = (self.z[:, w] >> b) & one
            self.r[:] = (self.r + 2 * (xb & zb).astype(np.uint8)) & 3
            if name == "H":
                diff = (xb ^ zb) << b
                self.x[:, w] ^= diff
                self.z[:, w] ^= diff
            else:
                self.z[:, w] ^= xb << b
        elif name == "CNOT":
            c, t = qubits
            if c == t:
                raise ValueError("CNOT control and target must differ")
            wc, bc = c >> 6, np.uint64(c & 63)
            wt, bt = t >> 6, np.uint64(t & 63)
            xc = (self.x[:, wc] >> bc) & one
            zc = (self.z[:, wc] >> bc) & one
            xt = (self.x[:, wt] >> bt) & one
            zt = (self.z[:, wt] >> bt) & one
            self.r[:] = (
                self.r + 2 * (xc & zt & (xt ^ zc ^ one)).astype(np.uint8)
            ) & 3
            self.x[:, wt] ^= xc << bt
            self.z[:, wc] ^= zt << bc
        else:  # SWAP
            a, b_ = qubits
            if a == b_:
                raise ValueError("SWAP qubits must differ")
            wa, ba = a >> 6, np.uint64(a & 63)
            wb, bb = b_ >> 6, np.uint64(b_ & 63)
            for arr in (self.x, self.z):
                abit = (arr[:, wa] >> ba) & one
                bbit = (arr[:, wb] >> bb) & one
                diff = abit ^ bbit
                arr[:, wa] ^= diff << ba
                arr[:, wb] ^= diff << bb

    def apply_two_qubit_clifford(self, gate, qa: int, qb: int):
        """Apply a two-qubit Clifford (anything exposing ``tables()`` ->
        16-entry bits/phase arrays, e.g. :class:`miptkz.clifford.CliffordGate2Q`)
        on qubit pair ``(qa, qb)``."""
        self._check_qubit(qa)
        self._check_qubit(qb)
        if qa == qb:
            raise ValueError("gate qubits must differ")
        bits16, phase16 = gate.tables()
        kernels.apply_gates(
            self.x,
            self.z,
            self.r,
            np.array([qa], np.int64),
            np.array([qb], np.int64),
            np.array([0], np.int64),
            bits16[None, :],
            phase16[None, :],
        )

    # -- measurement ------------------------------------------------------

    def measure_z(self, q: int, rng: np.random.Generator) -> MeasurementOutcome:
        """Projectively measure Z on qubit ``q``; consumes exactly one
        outcome bit from ``rng`` whether or not the outcome is random."""
        self._check_qubit(q)
        bits = rng.integers(0, 2, size=1, dtype=np.uint8)
        values, was_random = kernels.measure_sites(
            self.x, self.z, self.r, np.array([q], np.int64), bits
        )
        return MeasurementOutcome(int(values[0]), bool(was_random[0]))

    def measure_many(self, sites: np.ndarray, bits: np.ndarray):
        """Measure Z on ``sites`` in order with pre-drawn outcome bits.
        Hot path used by the circuit protocol; no per-site validation."""
        return kernels.measure_sites(self.x, self.z, self.r, sites, bits)

    # -- growth -----------------------------------------------------------

    def append_qubit(self) -> int:
        """Append one qubit in |0> (in place); returns its index."""
        n, W = self.n, self.n_words
        n2 = n + 1
        W2 = (n2 + 63) >> 6
        x = np.zeros((2 * n2, W2), np.uint64)
        z = np.zeros((2 * n2, W2), np.uint64)
        r = np.zeros(2 * n2, np.uint8)
        x[:n, :W] = self.x[:n]
        z[:n, :W] = self.z[:n]
        r[:n] = self.r[:n]
        x[n2 : n2 + n, :W] = self.x[n:]
        z[n2 : n2 + n, :W] = self.z[n:]
        r[n2 : n2 + n] = self.r[n:]
        one = np.uint64(1)
        q = n
        x[n, q >> 6] |= one << np.uint64(q & 63)
        z[2 * n2 - 1, q >> 6] |= one << np.uint64(q & 63)
        self.n, self.x, self.z, self.r = n2, x, z, r
        return q

    # -- validation -------------------------------------------------------

    def validate(self):
        """Check symplectic orthonormality, full GF(2) rank, and phase
        domain; raises ValueError on the first violation."""
        bad = np.nonzero((self.r != 0) & (self.r != 2))[0]
        if bad.size:
            raise ValueError(f"row {int(bad[0])}: phase {int(self.r[bad[0]])} not in {{0, 2}}")
        X, Z, _ = self.to_bool_arrays()
        gram = (
            X.astype(np.uint8) @ Z.T.astype(np.uint8)
            + Z.astype(np.uint8) @ X.T.astype(np.uint8)
        ) & 1
        n = self.n
        expect = np.zeros_like(gram)
        expect[:n, n:] = np.eye(n, dtype=gram.dtype)
        expect[n:, :n] = np.eye(n, dtype=gram.dtype)
        if not np.array_equal(gram, expect):
            i, j = map(int, np.argwhere(gram != expect)[0])
            raise ValueError(
                f"symplectic orthonormality violated between rows {i} and {j}"
            )
        # nondegeneracy of the symplectic Gram matrix implies the 2n rows
        # are independent over GF(2), so rank needs no separate check.


# -- functional wrappers (operation-style API) ------------------------------


def new_zero_state(n_qubits: int) -> Tableau:
    """|0...0> on ``n_qubits`` qubits: stabilizers +Z_q, destabilizers +X_q."""
    return Tableau(n_qubits)


def apply_two_qubit_clifford(state: Tableau, gate, qa: int, qb: int) -> None:
    state.apply_two_qubit_clifford(gate, qa, qb)


def apply_fixture_gate(state: Tableau, name: str, *qubits: int) -> None:
    state.apply_fixture_gate(name, *qubits)


def measure_z(state: Tableau, q: int, rng: np.random.Generator) -> MeasurementOutcome:
    return state.measure_z(q, rng)
