"""Dense linear-algebra oracles for small-n cross-checks (tests only).

Conventions
-----------
* Basis index ``i`` is little-endian: qubit ``q`` holds bit ``(i >> q) & 1``.
* Two-qubit unitaries act on an ordered pair ``(qa, qb)`` in the basis
  ``k = (bit_qa << 1) | bit_qb``.
"""

from __future__ import annotations

import numpy as np

from miptkz.clifford import enumerate_2q_group
from miptkz.tableau import PauliOperator

_H = np.array([[1, 1], [1, -1]], complex) / np.sqrt(2)
_S = np.array([[1, 0], [0, 1j]], complex)
_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], complex)
_Z = np.array([[1, 0], [0, -1]], complex)

# control = first index bit (qa)
_CX_AB = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], complex
)
# control = second index bit (qb)
_CX_BA = np.array(
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], complex
)

GENERATOR_UNITARIES = {
    "H_a": np.kron(_H, _I2),
    "H_b": np.kron(_I2, _H),
    "S_a": np.kron(_S, _I2),
    "S_b": np.kron(_I2, _S),
    "CX_ab": _CX_AB,
    "CX_ba": _CX_BA,
}

FIXTURE_UNITARIES = {
    "H": _H,
    "S": _S,
    "CNOT": _CX_AB,
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], complex
    ),
}


def gate_unitary(index: int) -> np.ndarray:
    """4x4 unitary (up to a fixed global phase) of a canonical-index gate."""
    group = enumerate_2q_group()
    u = np.eye(4, dtype=complex)
    for name in group.generator_word(index):
        u = u @ GENERATOR_UNITARIES[name]
    return u


def pauli_matrix_2q(p: PauliOperator) -> np.ndarray:
    """Matrix of a 2-qubit Pauli in the (qa, qb) gate basis."""
    mats = []
    for bit in (0, 1):  # qa first (most significant index bit)
        x = (p.x_mask >> bit) & 1
        z = (p.z_mask >> bit) & 1
        m = _I2
        if x and z:
            m = 1j * _X @ _Z
        elif x:
            m = _X
        elif z:
            m = _Z
        mats.append(m)
    return p.phase * np.kron(mats[0], mats[1])


class StateVector:
    """Tiny dense simulator for n <= ~12 qubits."""

    def __init__(self, n: int):
        self.n = n
        self.psi = np.zeros(1 << n, complex)
        self.psi[0] = 1.0

    def _pair_indices(self, qa: int, qb: int):
        idx = np.arange(1 << self.n)
        base = idx[(idx & ((1 << qa) | (1 << qb))) == 0]
        cols = [base | (((k >> 1) & 1) << qa) | ((k & 1) << qb) for k in range(4)]
        return np.stack(cols, axis=1)  # [n_base, 4]

    def apply_2q(self, u4: np.ndarray, qa: int, qb: int):
        idx = self._pair_indices(qa, qb)
        self.psi[idx] = self.psi[idx] @ u4.T

    def apply_1q(self, u2: np.ndarray, q: int):
        idx = np.arange(1 << self.n)
        base = idx[(idx & (1 << q)) == 0]
        pair = np.stack([base, base | (1 << q)], axis=1)
        self.psi[pair] = self.psi[pair] @ u2.T

    def prob_z_plus(self, q: int) -> float:
        """Probability of outcome +1 (bit 0) for a Z measurement of q."""
        idx = np.arange(1 << self.n)
        mask = ((idx >> q) & 1) == 0
        return float(np.sum(np.abs(self.psi[mask]) ** 2))

    def collapse_z(self, q: int, value: int):
        """Project onto Z_q = value (+1/-1) and renormalize."""
        idx = np.arange(1 << self.n)
        bit = 0 if value > 0 else 1
        keep = ((idx >> q) & 1) == bit
        self.psi[~keep] = 0.0
        norm = np.linalg.norm(self.psi)
        if norm < 1e-12:
            raise ValueError("projection annihilated the state")
        self.psi /= norm

    def pauli_expectation(self, p: PauliOperator) -> complex:
        """<psi| P |psi> for an n-qubit signed Pauli."""
        idx = np.arange(1 << self.n)
        flipped = idx ^ p.x_mask
        # i^{|x&z|} prod Z^z on the flipped ket, acting left on <psi|
        signs = np.ones(1 << self.n, complex)
        zpar = np.zeros(1 << self.n, np.int64)
        for q in range(self.n):
            if (p.z_mask >> q) & 1:
                zpar += (flipped >> q) & 1
        signs = (-1.0) ** zpar
        phase = 1j ** ((p.x_mask & p.z_mask).bit_count() % 4)
        amp = np.vdot(self.psi, p.phase * phase * signs * self.psi[flipped])
        return complex(amp)

    def entropy_bits(self, sites) -> float:
        """Entanglement entropy of ``sites`` in bits (von Neumann)."""
        sites = sorted(int(s) for s in sites)
        rest = [q for q in range(self.n) if q not in sites]
        rows = np.zeros(1 << self.n, np.int64)
        for pos, q in enumerate(sites):
            rows |= ((np.arange(1 << self.n) >> q) & 1) << pos
        cols = np.zeros(1 << self.n, np.int64)
        for pos, q in enumerate(rest):
            cols |= ((np.arange(1 << self.n) >> q) & 1) << pos
        m = np.zeros((1 << len(sites), 1 << len(rest)), complex)
        m[rows, cols] = self.psi
        lam = np.linalg.svd(m, compute_uv=False) ** 2
        lam = lam[lam > 1e-12]
        return float(-np.sum(lam * np.log2(lam)))
