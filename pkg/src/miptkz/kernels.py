"""Bit-packed stabilizer-tableau kernels with selectable backend.

Two interchangeable implementations of the hot inner loops:

* ``numba`` -- explicit loops compiled with :func:`numba.njit` (default
  when numba is importable).
* ``numpy`` -- vectorised pure-numpy fallback.

The active backend is chosen at import time from the ``MIPTKZ_BACKEND``
environment variable (``auto`` | ``numba`` | ``numpy``).  Both versions
operate on the same packed layout and produce bit-identical results.

Layout
------
* ``x``, ``z`` : ``uint64[2n, W]`` -- X/Z bitmasks, 64 qubit columns per
  word (``W = ceil(n/64)``), LSB first.  Rows ``0..n-1`` are
  destabilizers, rows ``n..2n-1`` stabilizers.
* ``r`` : ``uint8[2n]`` -- phase exponent of ``i``; always 0 (+1) or 2 (-1)
  for a valid row.  Row products accumulate the exponent mod 4.

Phase bookkeeping follows the Aaronson--Gottesman tableau algorithm
(arXiv:quant-ph/0406196): multiplying Pauli rows adds, per qubit, the
exponent of ``i`` picked up when the two single-qubit Paulis are
multiplied.  The per-word bit-parallel form used here counts +1 and -1
contributions with popcounts.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "BACKEND",
    "HAVE_NUMBA",
    "apply_gates",
    "measure_sites",
    "pack_rows",
    "gf2_rank_words",
    "implementations",
]

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)

if hasattr(np, "bitwise_count"):

    def _popcount(a):
        return np.bitwise_count(a)

else:  # numpy < 2.0

    def _popcount(a):
        a = a - ((a >> np.uint64(1)) & _M1)
        a = (a & _M2) + ((a >> np.uint64(2)) & _M2)
        a = (a + (a >> np.uint64(4))) & _M4
        return (a * _H01) >> np.uint64(56)


# ---------------------------------------------------------------------------
# pure-numpy implementations (vectorised over rows)
# ---------------------------------------------------------------------------


def _phase_sum_numpy(x1, z1, x2, z2):
    """Mod-4 exponent of i picked up multiplying row1 into row2, per row2.

    ``x1, z1`` are single packed rows ``[W]``; ``x2, z2`` are stacks
    ``[..., W]``.  Returns an int64 array of shape ``x2.shape[:-1]``.
    """
    plus = (x1 & z1 & ~x2 & z2) | (x1 & ~z1 & x2 & z2) | (~x1 & z1 & x2 & ~z2)
    minus = (x1 & z1 & x2 & ~z2) | (x1 & ~z1 & ~x2 & z2) | (~x1 & z1 & x2 & z2)
    return (
        _popcount(plus).sum(axis=-1, dtype=np.int64)
        - _popcount(minus).sum(axis=-1, dtype=np.int64)
    )


def _apply_gates_numpy(x, z, r, qa, qb, gate_idx, bits_tbl, phase_tbl):
    """Apply a sequence of two-qubit Cliffords given as table indices.

    ``bits_tbl``/``phase_tbl`` map (gate, input pattern) -> output pattern
    nibble ``xa za xb zb`` and phase increment (0 or 2).
    """
    one = np.uint64(1)
    for g in range(len(qa)):
        a = int(qa[g])
        b = int(qb[g])
        wa, ba = a >> 6, np.uint64(a & 63)
        wb, bb = b >> 6, np.uint64(b & 63)
        ma, mb = one << ba, one << bb
        tb = bits_tbl[gate_idx[g]]
        tp = phase_tbl[gate_idx[g]]
        xa = (x[:, wa] >> ba) & one
        za = (z[:, wa] >> ba) & one
        xb = (x[:, wb] >> bb) & one
        zb = (z[:, wb] >> bb) & one
        pat = (xa << np.uint64(3) | za << np.uint64(2) | xb << one | zb).astype(
            np.intp
        )
        out = tb[pat]
        r[:] = (r + tp[pat]) & 3
        x[:, wa] = (x[:, wa] & ~ma) | (((out >> 3) & 1).astype(np.uint64) << ba)
        z[:, wa] = (z[:, wa] & ~ma) | (((out >> 2) & 1).astype(np.uint64) << ba)
        x[:, wb] = (x[:, wb] & ~mb) | (((out >> 1) & 1).astype(np.uint64) << bb)
        z[:, wb] = (z[:, wb] & ~mb) | ((out & 1).astype(np.uint64) << bb)


def _measure_sites_numpy(x, z, r, sites, bits):
    """Measure Z on each site in order; ``bits`` pre-draws one outcome bit
    per event (consumed only notionally when the outcome is deterministic).

    Returns ``(values, was_random)`` as ``int8`` / ``uint8`` arrays.
    """
    n = x.shape[0] // 2
    one = np.uint64(1)
    m = len(sites)
    values = np.empty(m, np.int8)
    was_random = np.zeros(m, np.uint8)
    for k in range(m):
        q = int(sites[k])
        w, bshift = q >> 6, np.uint64(q & 63)
        bit = one << bshift
        colx = (x[:, w] & bit) != 0
        anti = np.nonzero(colx[n:])[0]
        if anti.size:
            p = n + int(anti[0])
            targets = np.nonzero(colx)[0]
            targets = targets[targets != p]
            if targets.size:
                cnt = _phase_sum_numpy(x[p], z[p], x[targets], z[targets])
                r[targets] = ((r[targets].astype(np.int64) + int(r[p]) + cnt) & 3).astype(
                    np.uint8
                )
                x[targets] ^= x[p]
                z[targets] ^= z[p]
            d = p - n
            x[d] = x[p]
            z[d] = z[p]
            r[d] = r[p]
            x[p] = 0
            z[p] = 0
            z[p, w] = bit
            r[p] = 2 * int(bits[k])
            values[k] = 1 - 2 * int(bits[k])
            was_random[k] = 1
        else:
            # Z_q is in the group up to sign: the sign is the phase of the
            # product of stabilizers whose destabilizer partner anticommutes
            # with Z_q.  The rows commute, so pairwise cross terms suffice.
            rows = n + np.nonzero(colx[:n])[0]
            e = int(r[rows].sum()) + int(
                _popcount(x[rows] & z[rows]).sum(dtype=np.int64)
            )
            if rows.size > 1:
                par = (
                    _popcount(z[rows][:, None, :] & x[rows][None, :, :]).sum(
                        axis=-1, dtype=np.int64
                    )
                    & 1
                )
                e += 2 * int(np.triu(par, 1).sum())
            values[k] = 1 - (e & 3)
            was_random[k] = 0
    return values, was_random


def _pack_rows_numpy(x, z, row0, row1, cols):
    """Pack the X and Z column pairs of ``cols`` (rows [row0, row1)) into a
    fresh bit matrix with 2*len(cols) columns (X bit, then Z bit, per qubit)."""
    one = np.uint64(1)
    nrows = row1 - row0
    m = len(cols)
    out = np.zeros((nrows, (2 * m + 63) >> 6), np.uint64)
    for k in range(m):
        q = int(cols[k])
        w, bshift = q >> 6, np.uint64(q & 63)
        xb = (x[row0:row1, w] >> bshift) & one
        zb = (z[row0:row1, w] >> bshift) & one
        px, py = 2 * k, 2 * k + 1
        out[:, px >> 6] |= xb << np.uint64(px & 63)
        out[:, py >> 6] |= zb << np.uint64(py & 63)
    return out


def _gf2_rank_words_numpy(mat, ncols):
    """GF(2) rank of a packed bit matrix.  ``mat`` is clobbered."""
    one = np.uint64(1)
    nrows = mat.shape[0]
    rank = 0
    for c in range(ncols):
        w, bshift = c >> 6, np.uint64(c & 63)
        bit = one << bshift
        col = np.nonzero((mat[rank:, w] & bit) != 0)[0]
        if col.size == 0:
            continue
        p = rank + int(col[0])
        if p != rank:
            tmp = mat[rank].copy()
            mat[rank] = mat[p]
            mat[p] = tmp
        rest = rank + 1 + np.nonzero((mat[rank + 1 :, w] & bit) != 0)[0]
        if rest.size:
            mat[rest] ^= mat[rank]
        rank += 1
        if rank == nrows:
            break
    return rank


_NUMPY_IMPL = {
    "apply_gates": _apply_gates_numpy,
    "measure_sites": _measure_sites_numpy,
    "pack_rows": _pack_rows_numpy,
    "gf2_rank_words": _gf2_rank_words_numpy,
}


# ---------------------------------------------------------------------------
# numba implementations (explicit loops over rows/words)
# ---------------------------------------------------------------------------

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False

_NUMBA_IMPL = None

if HAVE_NUMBA:
    _jit = numba.njit(cache=True, nogil=True)

    @_jit
    def _pc64(v):
        v = v - ((v >> np.uint64(1)) & np.uint64(0x5555555555555555))
        v = (v & np.uint64(0x3333333333333333)) + (
            (v >> np.uint64(2)) & np.uint64(0x3333333333333333)
        )
        v = (v + (v >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
        return (v * np.uint64(0x0101010101010101)) >> np.uint64(56)

    @_jit
    def _phase_sum_rows(x, z, src, dst):
        """Exponent of i from multiplying row ``src`` into row ``dst``."""
        acc = np.int64(0)
        for j in range(x.shape[1]):
            x1 = x[src, j]
            z1 = z[src, j]
            x2 = x[dst, j]
            z2 = z[dst, j]
            plus = (
                (x1 & z1 & ~x2 & z2)
                | (x1 & ~z1 & x2 & z2)
                | (~x1 & z1 & x2 & ~z2)
            )
            minus = (
                (x1 & z1 & x2 & ~z2)
                | (x1 & ~z1 & ~x2 & z2)
                | (~x1 & z1 & x2 & z2)
            )
            acc += np.int64(_pc64(plus)) - np.int64(_pc64(minus))
        return acc

    @_jit
    def _apply_gates_numba(x, z, r, qa, qb, gate_idx, bits_tbl, phase_tbl):
        one = np.uint64(1)
        n2 = x.shape[0]
        for g in range(qa.shape[0]):
            a = qa[g]
            b = qb[g]
            wa = a >> 6
            ba = np.uint64(a & 63)
            wb = b >> 6
            bb = np.uint64(b & 63)
            ma = one << ba
            mb = one << bb
            gi = gate_idx[g]
            for i in range(n2):
                xa = (x[i, wa] >> ba) & one
                za = (z[i, wa] >> ba) & one
                xb = (x[i, wb] >> bb) & one
                zb = (z[i, wb] >> bb) & one
                pat = (xa << np.uint64(3)) | (za << np.uint64(2)) | (xb << one) | zb
                out = bits_tbl[gi, pat]
                r[i] = (r[i] + phase_tbl[gi, pat]) & 3
                x[i, wa] = (x[i, wa] & ~ma) | (np.uint64((out >> 3) & 1) << ba)
                z[i, wa] = (z[i, wa] & ~ma) | (np.uint64((out >> 2) & 1) << ba)
                x[i, wb] = (x[i, wb] & ~mb) | (np.uint64((out >> 1) & 1) << bb)
                z[i, wb] = (z[i, wb] & ~mb) | (np.uint64(out & 1) << bb)

    @_jit
    def _measure_sites_numba(x, z, r, sites, bits):
        one = np.uint64(1)
        n = x.shape[0] // 2
        W = x.shape[1]
        m = sites.shape[0]
        values = np.empty(m, np.int8)
        was_random = np.zeros(m, np.uint8)
        sx = np.zeros(W, np.uint64)
        sz = np.zeros(W, np.uint64)
        for k in range(m):
            q = sites[k]
            w = q >> 6
            bit = one << np.uint64(q & 63)
            pivot = -1
            for i in range(n, 2 * n):
                if x[i, w] & bit:
                    pivot = i
                    break
            if pivot >= 0:
                for h in range(2 * n):
                    if h != pivot and (x[h, w] & bit):
                        ph = np.int64(r[h]) + np.int64(r[pivot]) + _phase_sum_rows(
                            x, z, pivot, h
                        )
                        r[h] = np.uint8(ph & 3)
                        for j in range(W):
                            x[h, j] ^= x[pivot, j]
                            z[h, j] ^= z[pivot, j]
                d = pivot - n
                for j in range(W):
                    x[d, j] = x[pivot, j]
                    z[d, j] = z[pivot, j]
                    x[pivot, j] = np.uint64(0)
                    z[pivot, j] = np.uint64(0)
                r[d] = r[pivot]
                z[pivot, w] = bit
                r[pivot] = 2 * bits[k]
                values[k] = 1 - 2 * np.int8(bits[k])
                was_random[k] = 1
            else:
                for j in range(W):
                    sx[j] = np.uint64(0)
                    sz[j] = np.uint64(0)
                ph = np.int64(0)
                for i in range(n):
                    if x[i, w] & bit:
                        s = n + i
                        acc = np.int64(0)
                        for j in range(W):
                            x1 = x[s, j]
                            z1 = z[s, j]
                            x2 = sx[j]
                            z2 = sz[j]
                            plus = (
                                (x1 & z1 & ~x2 & z2)
                                | (x1 & ~z1 & x2 & z2)
                                | (~x1 & z1 & x2 & ~z2)
                            )
                            minus = (
                                (x1 & z1 & x2 & ~z2)
                                | (x1 & ~z1 & ~x2 & z2)
                                | (~x1 & z1 & x2 & z2)
                            )
                            acc += np.int64(_pc64(plus)) - np.int64(_pc64(minus))
                            sx[j] ^= x1
                            sz[j] ^= z1
                        ph = (ph + np.int64(r[s]) + acc) & 3
                values[k] = 1 - np.int8(ph)
                was_random[k] = 0
        return values, was_random

    @_jit
    def _pack_rows_numba(x, z, row0, row1, cols):
        one = np.uint64(1)
        nrows = row1 - row0
        m = cols.shape[0]
        out = np.zeros((nrows, (2 * m + 63) >> 6), np.uint64)
        for k in range(m):
            q = cols[k]
            w = q >> 6
            bshift = np.uint64(q & 63)
            px = 2 * k
            py = 2 * k + 1
            wx = px >> 6
            wy = py >> 6
            sxp = np.uint64(px & 63)
            syp = np.uint64(py & 63)
            for i in range(nrows):
                out[i, wx] |= ((x[row0 + i, w] >> bshift) & one) << sxp
                out[i, wy] |= ((z[row0 + i, w] >> bshift) & one) << syp
        return out

    @_jit
    def _gf2_rank_words_numba(mat, ncols):
        one = np.uint64(1)
        nrows = mat.shape[0]
        W = mat.shape[1]
        rank = 0
        for c in range(ncols):
            w = c >> 6
            bit = one << np.uint64(c & 63)
            pivot = -1
            for i in range(rank, nrows):
                if mat[i, w] & bit:
                    pivot = i
                    break
            if pivot < 0:
                continue
            if pivot != rank:
                for j in range(W):
                    tmp = mat[rank, j]
                    mat[rank, j] = mat[pivot, j]
                    mat[pivot, j] = tmp
            for i in range(rank + 1, nrows):
                if mat[i, w] & bit:
                    for j in range(W):
                        mat[i, j] ^= mat[rank, j]
            rank += 1
            if rank == nrows:
                break
        return rank

    _NUMBA_IMPL = {
        "apply_gates": _apply_gates_numba,
        "measure_sites": _measure_sites_numba,
        "pack_rows": _pack_rows_numba,
        "gf2_rank_words": _gf2_rank_words_numba,
    }


# ---------------------------------------------------------------------------
# backend selection
# ---------------------------------------------------------------------------


def _pick_backend():
    choice = os.environ.get("MIPTKZ_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"MIPTKZ_BACKEND={choice!r}: expected 'auto', 'numba' or 'numpy'"
        )
    if choice == "numpy":
        return "numpy"
    if not HAVE_NUMBA:
        if choice == "numba":
            raise ImportError("MIPTKZ_BACKEND=numba but numba is not importable")
        return "numpy"
    return "numba"


BACKEND = _pick_backend()


def implementations():
    """Mapping backend name -> kernel dict, for benchmarks and tests."""
    impls = {"numpy": _NUMPY_IMPL}
    if HAVE_NUMBA:
        impls["numba"] = _NUMBA_IMPL
    return impls


_ACTIVE = _NUMPY_IMPL if BACKEND == "numpy" else _NUMBA_IMPL

apply_gates = _ACTIVE["apply_gates"]
measure_sites = _ACTIVE["measure_sites"]
pack_rows = _ACTIVE["pack_rows"]
gf2_rank_words = _ACTIVE["gf2_rank_words"]
