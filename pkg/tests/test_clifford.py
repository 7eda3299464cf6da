"""Two-qubit Clifford group enumeration vs. dense unitary algebra.

References used here are independent of the enumeration code: the group
order 11520 is classical (|C_2| = 2^{2^2+3} * prod (4^j - 1) for n=2), and
each gate's tableau action is compared against explicit conjugation
U P U^dagger of 4x4 Pauli matrices by the unitary rebuilt from the gate's
generator word.
"""

from __future__ import annotations

import numpy as np
import pytest

from miptkz.clifford import (
    GROUP_ORDER,
    canonical_index,
    enumerate_2q_group,
    gate_from_index,
    sample_uniform_2q,
)
from miptkz.tableau import PauliOperator

from statevector import GENERATOR_UNITARIES, gate_unitary, pauli_matrix_2q

_INPUT_PAULIS = (
    PauliOperator(2, 0b01, 0b00),  # X_a  (bit 0 = qubit a)
    PauliOperator(2, 0b00, 0b01),  # Z_a
    PauliOperator(2, 0b10, 0b00),  # X_b
    PauliOperator(2, 0b00, 0b10),  # Z_b
)


def test_group_order(group):
    assert GROUP_ORDER == 11520
    assert len(group) == 11520


def test_identity_is_index_zero(group):
    gate = gate_from_index(0)
    bits, phase = gate.tables()
    # each single-Pauli input nibble maps to itself with no phase
    for nib in (0b1000, 0b0100, 0b0010, 0b0001):
        assert bits[nib] == nib
    assert not phase.any()
    assert np.allclose(gate_unitary(0), np.eye(4))


def test_index_round_trip(group):
    for idx in range(0, GROUP_ORDER, 97):
        assert canonical_index(gate_from_index(idx)) == idx


def test_all_gates_distinct(group):
    keys = {gate_from_index(i).key() for i in range(GROUP_ORDER)}
    assert len(keys) == GROUP_ORDER


def _image_pauli(gate, p: PauliOperator) -> PauliOperator:
    """Tableau-side image of a single-generator Pauli under the gate."""
    bits, phase = gate.tables()
    nib = (
        (p.x_mask & 1) << 3
        | (p.z_mask & 1) << 2
        | ((p.x_mask >> 1) & 1) << 1
        | ((p.z_mask >> 1) & 1)
    )
    out = int(bits[nib])
    sign = -1 if phase[nib] else 1
    return PauliOperator(
        2,
        ((out >> 3) & 1) | (((out >> 1) & 1) << 1),
        ((out >> 2) & 1) | ((out & 1) << 1),
        sign,
    )


@pytest.mark.parametrize("seed", range(4))
def test_conjugation_matches_unitary(group, seed):
    """U P U^dag == tableau image, as exact 4x4 matrices, for random gates."""
    rng = np.random.default_rng(seed)
    for idx in rng.integers(0, GROUP_ORDER, size=60):
        u = gate_unitary(int(idx))
        gate = gate_from_index(int(idx))
        for p in _INPUT_PAULIS:
            lhs = u @ pauli_matrix_2q(p) @ u.conj().T
            rhs = pauli_matrix_2q(_image_pauli(gate, p))
            assert np.allclose(lhs, rhs, atol=1e-10), (
                f"gate {idx}: wrong image for {p}"
            )


def test_generator_words_rebuild_unitaries(group):
    """Multiplying generator unitaries along each stored word reproduces the
    gate's unitary up to global phase (checked for a deterministic sample)."""
    rng = np.random.default_rng(12)
    for idx in rng.integers(0, GROUP_ORDER, size=40):
        u = np.eye(4, dtype=complex)
        for name in group.generator_word(int(idx)):  # outermost first
            u = u @ GENERATOR_UNITARIES[name]
        ref = gate_unitary(int(idx))
        # compare up to global phase via largest-magnitude entry
        k = np.argmax(np.abs(ref))
        ratio = u.flat[k] / ref.flat[k]
        assert abs(abs(ratio) - 1) < 1e-10
        assert np.allclose(u, ratio * ref, atol=1e-10)


def test_unitarity_and_phases(group):
    rng = np.random.default_rng(5)
    for idx in rng.integers(0, GROUP_ORDER, size=50):
        u = gate_unitary(int(idx))
        assert np.allclose(u @ u.conj().T, np.eye(4), atol=1e-10)
    # phase table entries are 0 or 2 (quarter-turn units): images are Hermitian
    for idx in rng.integers(0, GROUP_ORDER, size=50):
        _, phase = gate_from_index(int(idx)).tables()
        assert set(np.unique(phase)) <= {0, 2}


def test_sample_uniform_returns_group_members(group):
    rng = np.random.default_rng(0)
    seen = set()
    for _ in range(200):
        gate = sample_uniform_2q(rng)
        idx = canonical_index(gate)
        assert 0 <= idx < GROUP_ORDER
        seen.add(idx)
    assert len(seen) > 190  # collisions in 200 draws from 11520 are rare


def test_expansion_tables_shape(group):
    assert group.bits_tbl.shape == (GROUP_ORDER, 16)
    assert group.phase_tbl.shape == (GROUP_ORDER, 16)
    # identity input nibble (no Pauli) must stay identity with no phase
    assert not group.bits_tbl[:, 0].any()
    assert not group.phase_tbl[:, 0].any()
