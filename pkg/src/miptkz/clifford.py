"""The two-qubit Clifford group: enumeration, sampling, canonical index.

A two-qubit Clifford is stored by its conjugation action: the images of
the four generators ``X_a, Z_a, X_b, Z_b`` as signed two-qubit Paulis.
Modulo global phase there are exactly 720 * 16 = 11520 such gates; the
full table is built once per process by closure over
``{H_a, H_b, S_a, S_b, CNOT(a->b), CNOT(b->a)}`` and cached.

Encoding used throughout:

* a two-qubit Pauli is a nibble ``(xa<<3)|(za<<2)|(xb<<1)|zb``;
* a signed Pauli is ``(sign<<4)|nibble`` with sign bit 1 meaning -1;
* a gate key packs its four (sign, nibble) images, each XORed with the
  identity's image, into a 20-bit int -- so the identity has key 0 and
  therefore canonical index 0.

For every gate a 16-entry lookup table is expanded: input Pauli pattern
-> (output pattern, phase increment mod 4).  Gate application in
:mod:`miptkz.kernels` is pure table lookup.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tableau import PauliOperator, symplectic_inner

__all__ = [
    "GROUP_ORDER",
    "CliffordGate2Q",
    "CliffordGroup2Q",
    "enumerate_2q_group",
    "sample_uniform_2q",
    "canonical_index",
    "gate_from_index",
]

GROUP_ORDER = 11520

_ID_NIBBLES = (0b1000, 0b0100, 0b0010, 0b0001)  # X_a, Z_a, X_b, Z_b


def _pc2(w):
    """Popcount of a 2-bit int (array-safe)."""
    return (w & 1) + ((w >> 1) & 1)


def _nib_to_uv(nib):
    """Nibble -> (u, v) 2-bit X/Z vectors, bit 1 = first qubit."""
    u = ((nib >> 3) & 1) << 1 | ((nib >> 1) & 1)
    v = ((nib >> 2) & 1) << 1 | (nib & 1)
    return u, v


def _uv_to_nib(u, v):
    return ((u >> 1) & 1) << 3 | ((v >> 1) & 1) << 2 | (u & 1) << 1 | (v & 1)


def _expand_tables(img_nibs, img_signs):
    """16-entry (bits, phase) lookup for one gate or a stack of gates.

    ``img_nibs``/``img_signs``: ``uint8[..., 4]``.  Returns
    ``(bits[..., 16], phase[..., 16])`` with phase increments in {0, 2}.

    The image of an input pattern is the ordered product of the selected
    generator images, tracked as ``i^e X^u Z^v`` with ``e`` mod 4.
    """
    img_nibs = np.asarray(img_nibs, np.int64)
    img_signs = np.asarray(img_signs, np.int64)
    u_img, v_img = _nib_to_uv(img_nibs)
    e_img = (2 * img_signs + _pc2(u_img & v_img)) & 3
    lead = img_nibs.shape[:-1]
    bits = np.zeros(lead + (16,), np.uint8)
    phase = np.zeros(lead + (16,), np.uint8)
    for pat in range(16):
        u_in, v_in = _nib_to_uv(pat)
        e = np.full(lead, _pc2(u_in & v_in), np.int64)
        u = np.zeros(lead, np.int64)
        v = np.zeros(lead, np.int64)
        for k in range(4):
            if (pat >> (3 - k)) & 1:
                e = (e + e_img[..., k] + 2 * _pc2(v & u_img[..., k])) & 3
                u = u ^ u_img[..., k]
                v = v ^ v_img[..., k]
        bits[..., pat] = _uv_to_nib(u, v)
        phase[..., pat] = (e - _pc2(u & v)) & 3
    return bits, phase


@dataclass(frozen=True)
class CliffordGate2Q:
    """A two-qubit Clifford given by the signed images of X_a, Z_a, X_b,
    Z_b (each a 2-qubit :class:`PauliOperator`)."""

    images: tuple[PauliOperator, PauliOperator, PauliOperator, PauliOperator]

    def __post_init__(self):
        if len(self.images) != 4:
            raise ValueError("a two-qubit Clifford needs exactly 4 images")
        for p in self.images:
            if p.n_qubits != 2:
                raise ValueError("images must be 2-qubit Paulis")
            if p.x_mask == 0 and p.z_mask == 0:
                raise ValueError("image of a generator cannot be the identity")
        # conjugation preserves (anti)commutation: images must reproduce the
        # generators' symplectic pattern, which also forces independence.
        gens = [
            PauliOperator(2, 1, 0),
            PauliOperator(2, 0, 1),
            PauliOperator(2, 2, 0),
            PauliOperator(2, 0, 2),
        ]
        for i in range(4):
            for j in range(i + 1, 4):
                want = symplectic_inner(gens[i], gens[j])
                got = symplectic_inner(self.images[i], self.images[j])
                if want != got:
                    raise ValueError(
                        f"images {i} and {j} break the symplectic pairing"
                    )

    def _nibs_signs(self):
        nibs = np.empty(4, np.uint8)
        signs = np.empty(4, np.uint8)
        for k, p in enumerate(self.images):
            # PauliOperator masks: bit 0 = first qubit of the pair
            xa, xb = p.x_mask & 1, (p.x_mask >> 1) & 1
            za, zb = p.z_mask & 1, (p.z_mask >> 1) & 1
            nibs[k] = (xa << 3) | (za << 2) | (xb << 1) | zb
            signs[k] = 0 if p.phase == 1 else 1
        return nibs, signs

    def key(self) -> int:
        nibs, signs = self._nibs_signs()
        key = 0
        for k in range(4):
            code = (int(signs[k]) << 4) | (int(nibs[k]) ^ _ID_NIBBLES[k])
            key |= code << (5 * k)
        return key

    def tables(self):
        """(bits, phase) 16-entry lookup arrays for the kernels."""
        nibs, signs = self._nibs_signs()
        return _expand_tables(nibs, signs)


def _gate_from_nibs(nibs, signs) -> CliffordGate2Q:
    images = []
    for k in range(4):
        nib, sgn = int(nibs[k]), int(signs[k])
        xa, za = (nib >> 3) & 1, (nib >> 2) & 1
        xb, zb = (nib >> 1) & 1, nib & 1
        images.append(
            PauliOperator(2, xa | (xb << 1), za | (zb << 1), 1 if sgn == 0 else -1)
        )
    return CliffordGate2Q(tuple(images))


# -- generator set -----------------------------------------------------------

# images of (X_a, Z_a, X_b, Z_b) as (nibble, sign) pairs
_GENERATORS = {
    "H_a": ([0b0100, 0b1000, 0b0010, 0b0001], [0, 0, 0, 0]),
    "H_b": ([0b1000, 0b0100, 0b0001, 0b0010], [0, 0, 0, 0]),
    "S_a": ([0b1100, 0b0100, 0b0010, 0b0001], [0, 0, 0, 0]),
    "S_b": ([0b1000, 0b0100, 0b0011, 0b0001], [0, 0, 0, 0]),
    "CX_ab": ([0b1010, 0b0100, 0b0010, 0b0101], [0, 0, 0, 0]),
    "CX_ba": ([0b1000, 0b0101, 0b1010, 0b0001], [0, 0, 0, 0]),
}
_GENERATOR_NAMES = tuple(_GENERATORS)


class CliffordGroup2Q:
    """The materialized group table, in canonical-index order.

    Attributes
    ----------
    nibs, signs : ``uint8[11520, 4]`` -- generator images per gate.
    bits_tbl, phase_tbl : ``uint8[11520, 16]`` -- expanded lookup tables;
        row ``i`` belongs to the gate with canonical index ``i``.
    keys : ``int64[11520]`` -- sorted 20-bit keys.
    word_parent, word_gen : BFS spanning tree over the generator set;
        ``word_gen[i]`` names the last generator applied, ``word_parent[i]``
        the canonical index it was applied to (identity has parent -1).
    """

    def __init__(self):
        gen_tables = {
            name: _expand_tables(np.array(n, np.uint8), np.array(s, np.uint8))
            for name, (n, s) in _GENERATORS.items()
        }

        def compose_with_generator(name, nibs, signs):
            gb, gp = gen_tables[name]
            out_n = np.empty(4, np.uint8)
            out_s = np.empty(4, np.uint8)
            for k in range(4):
                pat = int(nibs[k])
                out_n[k] = gb[pat]
                out_s[k] = signs[k] ^ (gp[pat] >> 1)
            return out_n, out_s

        def key_of(nibs, signs):
            key = 0
            for k in range(4):
                code = (int(signs[k]) << 4) | (int(nibs[k]) ^ _ID_NIBBLES[k])
                key |= code << (5 * k)
            return key

        id_nibs = np.array(_ID_NIBBLES, np.uint8)
        id_signs = np.zeros(4, np.uint8)
        seen = {0: 0}
        nibs_list = [id_nibs]
        signs_list = [id_signs]
        parent = [-1]
        genlab = [-1]
        frontier = [0]
        while frontier:
            nxt = []
            for idx in frontier:
                for gi, name in enumerate(_GENERATOR_NAMES):
                    nn, ns = compose_with_generator(
                        name, nibs_list[idx], signs_list[idx]
                    )
                    k = key_of(nn, ns)
                    if k not in seen:
                        seen[k] = len(nibs_list)
                        nibs_list.append(nn)
                        signs_list.append(ns)
                        parent.append(idx)
                        genlab.append(gi)
                        nxt.append(seen[k])
            frontier = nxt
        if len(nibs_list) != GROUP_ORDER:
            raise RuntimeError(
                f"group closure produced {len(nibs_list)} elements, "
                f"expected {GROUP_ORDER}"
            )

        nibs = np.stack(nibs_list)
        signs = np.stack(signs_list)
        keys = np.fromiter(
            (key_of(nibs[i], signs[i]) for i in range(GROUP_ORDER)),
            np.int64,
            GROUP_ORDER,
        )
        order = np.argsort(keys, kind="stable")
        rank = np.empty_like(order)
        rank[order] = np.arange(GROUP_ORDER)

        self.nibs = nibs[order]
        self.signs = signs[order]
        self.keys = keys[order]
        self.bits_tbl, self.phase_tbl = _expand_tables(self.nibs, self.signs)
        parent = np.asarray(parent, np.int64)
        self.word_parent = np.where(parent >= 0, rank[parent], -1)[order]
        self.word_gen = np.asarray(genlab, np.int64)[order]
        self.generator_names = _GENERATOR_NAMES

    def __len__(self) -> int:
        return GROUP_ORDER

    def gate(self, index: int) -> CliffordGate2Q:
        if not 0 <= index < GROUP_ORDER:
            raise ValueError(f"canonical index {index} out of range")
        return _gate_from_nibs(self.nibs[index], self.signs[index])

    def index_of(self, gate: CliffordGate2Q) -> int:
        key = gate.key()
        pos = int(np.searchsorted(self.keys, key))
        if pos >= GROUP_ORDER or self.keys[pos] != key:
            raise ValueError("gate is not a two-qubit Clifford conjugation table")
        return pos

    def generator_word(self, index: int) -> list[str]:
        """Generator names whose left-to-right product equals the gate."""
        word = []
        while index > 0:
            word.append(self.generator_names[int(self.word_gen[index])])
            index = int(self.word_parent[index])
        return word  # outermost (last applied) first


_GROUP: CliffordGroup2Q | None = None


def enumerate_2q_group() -> CliffordGroup2Q:
    """Build (once per process) and return the full group table."""
    global _GROUP
    if _GROUP is None:
        _GROUP = CliffordGroup2Q()
    return _GROUP


def sample_uniform_2q(rng: np.random.Generator) -> CliffordGate2Q:
    """Draw a gate uniformly over all 11520 two-qubit Cliffords
    (720 symplectic classes x 16 sign assignments)."""
    group = enumerate_2q_group()
    return group.gate(int(rng.integers(0, GROUP_ORDER)))


def canonical_index(gate: CliffordGate2Q) -> int:
    """Stable injective index in [0, 11520); the identity maps to 0."""
    return enumerate_2q_group().index_of(gate)


def gate_from_index(index: int) -> CliffordGate2Q:
    return enumerate_2q_group().gate(index)
