"""Shared fixtures: the enumerated 2-qubit Clifford group and a harness that
co-evolves a stabilizer tableau with a dense statevector oracle."""

from __future__ import annotations

import numpy as np
import pytest

from miptkz.clifford import enumerate_2q_group, gate_from_index
from miptkz.tableau import Tableau, new_zero_state

from statevector import FIXTURE_UNITARIES, StateVector, gate_unitary


@pytest.fixture(scope="session")
def group():
    return enumerate_2q_group()


class PairedState:
    """A tableau and a statevector driven by the same operations.

    Measurement outcomes are drawn on the tableau side and forced onto the
    statevector, so the two stay on the same branch of the trajectory.
    """

    def __init__(self, n: int, seed: int = 0):
        self.n = n
        self.tab: Tableau = new_zero_state(n)
        self.vec = StateVector(n)
        self.rng = np.random.default_rng(seed)

    def apply_group_gate(self, index: int, qa: int, qb: int):
        self.tab.apply_two_qubit_clifford(gate_from_index(index), qa, qb)
        self.vec.apply_2q(gate_unitary(index), qa, qb)

    def apply_fixture(self, name: str, *qubits: int):
        self.tab.apply_fixture_gate(name, *qubits)
        u = FIXTURE_UNITARIES[name]
        if u.shape == (2, 2):
            self.vec.apply_1q(u, qubits[0])
        else:
            self.vec.apply_2q(u, qubits[0], qubits[1])

    def measure(self, q: int):
        out = self.tab.measure_z(q, self.rng)
        p_plus = self.vec.prob_z_plus(q)
        if out.was_random:
            assert abs(p_plus - 0.5) < 1e-9, (
                f"tableau says random outcome at qubit {q} but oracle "
                f"P(+1)={p_plus}"
            )
        else:
            expected = 1 if p_plus > 0.5 else -1
            assert out.value == expected, (
                f"deterministic outcome mismatch at qubit {q}: tableau "
                f"{out.value}, oracle P(+1)={p_plus}"
            )
        self.vec.collapse_z(q, out.value)
        return out

    def random_step(self):
        """One random operation: group gate, fixture gate, or measurement."""
        kind = self.rng.integers(0, 3)
        if kind == 0:
            qa, qb = self.rng.choice(self.n, size=2, replace=False)
            self.apply_group_gate(int(self.rng.integers(0, 11520)), int(qa), int(qb))
        elif kind == 1:
            name = ["H", "S", "CNOT", "SWAP"][int(self.rng.integers(0, 4))]
            k = 1 if name in ("H", "S") else 2
            qs = self.rng.choice(self.n, size=k, replace=False)
            self.apply_fixture(name, *(int(q) for q in qs))
        else:
            self.measure(int(self.rng.integers(0, self.n)))

    def assert_consistent(self):
        """Every stabilizer row must have expectation +1 in the oracle state."""
        self.tab.validate()
        for i in range(self.n):
            val = self.vec.pauli_expectation(self.tab.stabilizer(i))
            assert abs(val - 1.0) < 1e-8, (
                f"stabilizer {i} expectation {val} != +1"
            )


@pytest.fixture
def paired():
    return PairedState
