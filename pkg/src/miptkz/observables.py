"""Entanglement observables of stabilizer states via GF(2) rank.

For a pure stabilizer state on ``n`` qubits and a site set ``A``, the
entanglement entropy in bits is ``rank_GF2(G_A) - |A|`` where ``G_A`` is
the n x 2|A| restriction of the stabilizer generator matrix to the X and
Z columns of ``A``.  All entropies returned here are exact integers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .tableau import Tableau

__all__ = [
    "Region",
    "gf2_rank",
    "entanglement_entropy",
    "half_chain_entropy",
    "tripartite_mutual_information",
    "ancilla_entropy",
]


@dataclass(frozen=True)
class Region:
    """A contiguous interval on a ring of ``ring_size`` sites, wrapping
    allowed.  ``start`` is the leftmost site, ``size`` the number of sites."""

    ring_size: int
    start: int
    size: int

    def __post_init__(self):
        if self.ring_size < 1:
            raise ValueError("ring_size must be positive")
        if not 0 <= self.start < self.ring_size:
            raise ValueError(
                f"start {self.start} out of range for ring of {self.ring_size}"
            )
        if not 1 <= self.size <= self.ring_size:
            raise ValueError(
                f"size {self.size} out of range for ring of {self.ring_size}"
            )

    def indices(self) -> np.ndarray:
        return (self.start + np.arange(self.size, dtype=np.int64)) % self.ring_size


def _as_sites(region, n: int) -> np.ndarray:
    if isinstance(region, Region):
        sites = region.indices()
    else:
        sites = np.asarray(list(region), np.int64)
    if sites.size == 0:
        raise ValueError("region must contain at least one site")
    if sites.min() < 0 or sites.max() >= n:
        raise ValueError(f"region sites out of range for n={n}")
    if np.unique(sites).size != sites.size:
        raise ValueError("region sites must be distinct")
    return sites


def gf2_rank(matrix) -> int:
    """Rank over GF(2) of a 0/1 matrix (any 2-D array-like).  The input is
    not mutated."""
    m = np.asarray(matrix)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if m.size == 0:
        return 0
    m = m.astype(np.uint8)
    if np.any(m > 1):
        raise ValueError("matrix entries must be 0 or 1")
    nrows, ncols = m.shape
    nbytes = ((ncols + 63) >> 6) << 3
    packed = np.zeros((nrows, nbytes), np.uint8)
    packed[:, : (ncols + 7) >> 3] = np.packbits(m, axis=1, bitorder="little")
    words = np.ascontiguousarray(packed).view(np.uint64)
    return int(kernels.gf2_rank_words(words, ncols))


def entanglement_entropy(state: Tableau, region) -> int:
    """Entanglement entropy of ``region`` (a :class:`Region` or iterable of
    site indices, unions of intervals welcome) in bits."""
    sites = _as_sites(region, state.n)
    packed = kernels.pack_rows(state.x, state.z, state.n, 2 * state.n, sites)
    rank = int(kernels.gf2_rank_words(packed, 2 * sites.size))
    return rank - sites.size


def half_chain_entropy(state: Tableau, system_size: int | None = None) -> int:
    """Entropy of the interval [0, L/2).  ``system_size`` defaults to all
    qubits; pass the system size explicitly when an ancilla is attached."""
    L = state.n if system_size is None else system_size
    if L % 2 or L < 2:
        raise ValueError(f"half-chain cut needs even system size, got L={L}")
    if L > state.n:
        raise ValueError(f"system size {L} exceeds qubit count {state.n}")
    return entanglement_entropy(state, np.arange(L // 2, dtype=np.int64))


def tripartite_mutual_information(
    state: Tableau, system_size: int | None = None
) -> int:
    """I3 over the four ring quarters A, B, C, D:
    ``S_A + S_B + S_C - S_AB - S_AC - S_BC + S_ABC`` (D is implicit)."""
    L = state.n if system_size is None else system_size
    if L % 4 or L < 4:
        raise ValueError(f"quarters need L divisible by 4, got L={L}")
    if L > state.n:
        raise ValueError(f"system size {L} exceeds qubit count {state.n}")
    quarter = L // 4
    a = np.arange(0, quarter, dtype=np.int64)
    b = np.arange(quarter, 2 * quarter, dtype=np.int64)
    c = np.arange(2 * quarter, 3 * quarter, dtype=np.int64)
    ent = lambda sites: entanglement_entropy(state, sites)
    return (
        ent(a)
        + ent(b)
        + ent(c)
        - ent(np.concatenate([a, b]))
        - ent(np.concatenate([a, c]))
        - ent(np.concatenate([b, c]))
        + ent(np.concatenate([a, b, c]))
    )


def ancilla_entropy(state: Tableau, ancilla: int | None = None) -> int:
    """Entropy of a single reference qubit (default: the last one); 1 while
    it stays maximally entangled with the system, 0 once purified."""
    q = state.n - 1 if ancilla is None else ancilla
    if not 0 <= q < state.n:
        raise ValueError(f"ancilla index {q} out of range for n={state.n}")
    return entanglement_entropy(state, np.array([q], np.int64))
