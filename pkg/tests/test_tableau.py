"""Stabilizer tableau vs. dense statevector oracle.

Every check here has an independent reference: either the brute-force
statevector evolution in ``statevector.py`` or an algebraic identity of the
stabilizer formalism (anticommutation pairing, group relations).
"""

from __future__ import annotations

import numpy as np
import pytest

from miptkz.tableau import (
    MeasurementOutcome,
    PauliOperator,
    new_zero_state,
    symplectic_inner,
)


def test_zero_state_rows():
    n = 5
    t = new_zero_state(n)
    for i in range(n):
        s = t.stabilizer(i)
        d = t.destabilizer(i)
        assert s.x_mask == 0 and s.z_mask == 1 << i and s.phase == 1
        assert d.z_mask == 0 and d.x_mask == 1 << i and d.phase == 1
    t.validate()


def test_pauli_operator_validation():
    with pytest.raises(ValueError):
        PauliOperator(3, 1 << 3, 0, 1)  # mask beyond n_qubits
    with pytest.raises(ValueError):
        PauliOperator(3, 0, 0, 0)  # phase must be +1/-1
    with pytest.raises(ValueError):
        PauliOperator(0, 0, 0, 1)
    assert PauliOperator(4, 0b0011, 0b0110).weight() == 3


def test_symplectic_inner_basics():
    x = PauliOperator(1, 1, 0)
    z = PauliOperator(1, 0, 1)
    y = PauliOperator(1, 1, 1)
    assert symplectic_inner(x, z) == 1
    assert symplectic_inner(x, x) == 0
    assert symplectic_inner(x, y) == 1
    assert symplectic_inner(y, z) == 1
    with pytest.raises(ValueError):
        symplectic_inner(x, PauliOperator(2, 1, 0))


@pytest.mark.parametrize("seed", range(8))
def test_random_circuit_matches_statevector(paired, seed):
    ps = paired(n=5, seed=seed)
    for _ in range(60):
        ps.random_step()
    ps.assert_consistent()


def test_destabilizers_pair_with_stabilizers(paired):
    ps = paired(n=4, seed=11)
    for _ in range(40):
        ps.random_step()
    t = ps.tab
    for i in range(t.n):
        for j in range(t.n):
            want = 1 if i == j else 0
            assert symplectic_inner(t.destabilizer(i), t.stabilizer(j)) == want


def test_deterministic_measurement_repeats():
    rng = np.random.default_rng(3)
    t = new_zero_state(3)
    out1 = t.measure_z(0, rng)
    assert out1 == MeasurementOutcome(value=1, was_random=False)
    t.apply_fixture_gate("H", 0)
    out2 = t.measure_z(0, rng)
    assert out2.was_random and out2.value in (1, -1)
    out3 = t.measure_z(0, rng)
    assert not out3.was_random and out3.value == out2.value


def test_minus_state_measures_minus_one():
    t = new_zero_state(1)
    t.apply_fixture_gate("H", 0)
    t.apply_fixture_gate("S", 0)
    t.apply_fixture_gate("S", 0)
    t.apply_fixture_gate("H", 0)  # H S S H = H Z H = X, so state is |1>
    out = t.measure_z(0, np.random.default_rng(0))
    assert out == MeasurementOutcome(value=-1, was_random=False)


def test_bell_pair_correlations():
    for trial in range(20):
        t = new_zero_state(2)
        t.apply_fixture_gate("H", 0)
        t.apply_fixture_gate("CNOT", 0, 1)
        rng = np.random.default_rng(trial)
        a = t.measure_z(0, rng)
        b = t.measure_z(1, rng)
        assert a.was_random and not b.was_random
        assert a.value == b.value


def test_measure_many_matches_sequential(paired):
    rng = np.random.default_rng(17)
    for trial in range(10):
        ps = paired(n=6, seed=100 + trial)
        for _ in range(30):
            kind = ps.rng.integers(0, 2)
            if kind == 0:
                qa, qb = ps.rng.choice(6, size=2, replace=False)
                ps.apply_group_gate(
                    int(ps.rng.integers(0, 11520)), int(qa), int(qb)
                )
            else:
                ps.measure(int(ps.rng.integers(0, 6)))
        sites = np.sort(rng.choice(6, size=3, replace=False)).astype(np.int64)
        bits = rng.integers(0, 2, size=3).astype(np.uint8)
        batch = ps.tab.copy()
        values, was_random = batch.measure_many(sites, bits)
        seq = ps.tab.copy()
        for k, q in enumerate(sites):
            out = seq.measure_z(int(q), _ForcedRng(bits[k]))
            assert values[k] == out.value
            assert bool(was_random[k]) == out.was_random
        assert batch == seq


class _ForcedRng:
    """Stand-in generator whose integers() always yields one fixed bit."""

    def __init__(self, bit):
        self.bit = int(bit)

    def integers(self, lo, hi, size=1, dtype=np.uint8):
        return np.full(size, self.bit, dtype)


def test_random_outcome_uses_predrawn_bit():
    for bit, value in ((0, 1), (1, -1)):
        t = new_zero_state(2)
        t.apply_fixture_gate("H", 0)
        out = t.measure_z(0, _ForcedRng(bit))
        assert out.was_random and out.value == value


def test_append_qubit():
    t = new_zero_state(3)
    t.apply_fixture_gate("H", 0)
    t.apply_fixture_gate("CNOT", 0, 1)
    fp = t.fingerprint()
    idx = t.append_qubit()
    assert idx == 3 and t.n == 4
    assert t.fingerprint() != fp
    t.validate()
    s = t.stabilizer(3)
    assert s.z_mask == 1 << 3 and s.x_mask == 0 and s.phase == 1
    out = t.measure_z(3, np.random.default_rng(0))
    assert out == MeasurementOutcome(value=1, was_random=False)


def test_append_qubit_across_word_boundary():
    t = new_zero_state(64)
    t.apply_fixture_gate("H", 63)
    idx = t.append_qubit()
    assert idx == 64 and t.n_words == 2
    t.apply_fixture_gate("CNOT", 63, 64)
    t.validate()
    rng = np.random.default_rng(1)
    a = t.measure_z(63, rng)
    b = t.measure_z(64, rng)
    assert a.was_random and not b.was_random and a.value == b.value


def test_copy_is_independent():
    t = new_zero_state(4)
    t.apply_fixture_gate("H", 2)
    c = t.copy()
    assert c == t and c.fingerprint() == t.fingerprint()
    c.apply_fixture_gate("H", 2)
    assert c != t


def test_validate_catches_corruption():
    t = new_zero_state(4)
    t.apply_fixture_gate("H", 1)
    t.x[2] ^= np.uint64(1)  # flip one bit of a destabilizer row
    with pytest.raises(ValueError):
        t.validate()


def test_qubit_index_errors():
    t = new_zero_state(4)
    with pytest.raises(ValueError):
        t.apply_fixture_gate("H", 4)
    with pytest.raises(ValueError):
        t.apply_fixture_gate("CNOT", 1, 1)
    with pytest.raises(ValueError):
        t.apply_fixture_gate("TOFFOLI", 0, 1)


def test_large_system_multiword_masks():
    """Cross the 64-qubit word boundary so multi-word packing is exercised."""
    t = new_zero_state(70)
    t.apply_fixture_gate("H", 0)
    for q in range(69):
        t.apply_fixture_gate("CNOT", q, q + 1)
    t.validate()
    rng = np.random.default_rng(9)
    first = t.measure_z(69, rng)
    assert first.was_random
    for q in range(69):
        out = t.measure_z(q, rng)
        assert not out.was_random and out.value == first.value
