"""Linear algebra over GF(2).

Vectors and matrices are numpy ``uint8`` arrays holding 0/1 entries; scipy
sparse matrices are accepted wherever a matrix is expected. Elimination runs
on rows packed into 64-bit words, so a few thousand rows and columns are
cheap.

Pivoting is deterministic: columns are scanned left to right and the pivot is
the lowest-index remaining row with a 1 in that column.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

__all__ = [
    "as_bits",
    "matmul",
    "rank",
    "rref",
    "kernel_basis",
    "solve",
    "RowSpace",
]


def as_bits(m) -> np.ndarray:
    """Return a dense ``uint8`` copy of ``m`` reduced modulo 2."""
    if sp.issparse(m):
        m = m.toarray()
    a = np.asarray(m)
    if a.dtype == bool:
        return a.astype(np.uint8)
    return (a.astype(np.int64) & 1).astype(np.uint8)


def matmul(a, b) -> np.ndarray:
    """Matrix (or matrix-vector) product over GF(2), returned dense."""
    if sp.issparse(a):
        a = a.astype(np.int64)
        out = a @ (b.astype(np.int64) if sp.issparse(b) else np.asarray(b, dtype=np.int64))
    else:
        a = np.asarray(a, dtype=np.int64)
        out = a @ (b.astype(np.int64) if sp.issparse(b) else np.asarray(b, dtype=np.int64))
    if sp.issparse(out):
        out = out.toarray()
    return (np.asarray(out) & 1).astype(np.uint8)


def _pack(a: np.ndarray) -> np.ndarray:
    rows, cols = a.shape
    nwords = max(1, (cols + 63) // 64)
    padded = np.zeros((rows, nwords * 64), dtype=np.uint8)
    padded[:, :cols] = a
    return np.packbits(padded, axis=1, bitorder="little").view("<u8").copy()


def _unpack(p: np.ndarray, cols: int) -> np.ndarray:
    bits = np.unpackbits(p.view(np.uint8), axis=1, bitorder="little")
    return bits[:, :cols].copy()


def _rref_packed(p: np.ndarray, cols: int, stop_col: int | None = None):
    """In-place reduced row echelon form on packed rows.

    Returns the list of pivot columns; row ``i`` of ``p`` holds pivot ``i``.
    Columns at or beyond ``stop_col`` are never used as pivots.
    """
    nrows = p.shape[0]
    pivots: list[int] = []
    row = 0
    last = cols if stop_col is None else min(cols, stop_col)
    for col in range(last):
        if row == nrows:
            break
        w, t = divmod(col, 64)
        bit = np.uint64(1) << np.uint64(t)
        colbits = (p[row:, w] & bit) != 0
        hits = np.flatnonzero(colbits)
        if hits.size == 0:
            continue
        piv = row + hits[0]
        if piv != row:
            p[[row, piv]] = p[[piv, row]]
        mask = (p[:, w] & bit) != 0
        mask[row] = False
        if mask.any():
            p[mask] ^= p[row]
        pivots.append(col)
        row += 1
    return pivots


def rref(m) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``m``.

    Returns ``(r, pivots)`` where ``r`` has one row per pivot (zero rows
    dropped) and ``pivots[i]`` is the pivot column of ``r[i]``.
    """
    a = as_bits(m)
    if a.ndim != 2:
        raise ValueError("expected a 2D matrix")
    rows, cols = a.shape
    if rows == 0 or cols == 0:
        return np.zeros((0, cols), dtype=np.uint8), []
    p = _pack(a)
    pivots = _rref_packed(p, cols)
    return _unpack(p[: len(pivots)], cols), pivots


def rank(m) -> int:
    """Dimension of the row space of ``m``."""
    a = as_bits(m)
    if a.size == 0:
        return 0
    # eliminate along the shorter side
    if a.shape[0] > a.shape[1]:
        a = a.T
    p = _pack(np.ascontiguousarray(a))
    return len(_rref_packed(p, a.shape[1]))


def kernel_basis(m) -> np.ndarray:
    """Basis of ``{x : m x = 0}`` as the rows of a ``uint8`` array.

    The vectors are indexed by free column in ascending order, each with a 1
    at its own free column and zeros at every other free column.
    """
    a = as_bits(m)
    cols = a.shape[1]
    r, pivots = rref(a)
    free = np.setdiff1d(np.arange(cols), np.asarray(pivots, dtype=np.int64))
    basis = np.zeros((free.size, cols), dtype=np.uint8)
    basis[np.arange(free.size), free] = 1
    if pivots:
        # x[pivot_i] = r[i, f] for the free column f
        basis[:, pivots] = r[:, free].T
    return basis


def solve(m, b) -> np.ndarray | None:
    """Some ``x`` with ``m x = b``, or ``None`` when the system is inconsistent.

    Free variables are set to zero.
    """
    a = as_bits(m)
    rhs = as_bits(b).reshape(-1)
    rows, cols = a.shape
    if rhs.size != rows:
        raise ValueError(f"right-hand side has length {rhs.size}, expected {rows}")
    aug = np.concatenate([a, rhs[:, None]], axis=1)
    p = _pack(aug)
    pivots = _rref_packed(p, cols + 1)
    if pivots and pivots[-1] == cols:
        return None
    r = _unpack(p[: len(pivots)], cols + 1)
    x = np.zeros(cols, dtype=np.uint8)
    if pivots:
        x[pivots] = r[:, cols]
    return x


class RowSpace:
    """Precomputed row space of a matrix for repeated membership tests."""

    def __init__(self, m):
        a = as_bits(m)
        self.ncols = a.shape[1]
        self.basis, pivots = rref(a)
        self.pivots = np.asarray(pivots, dtype=np.int64)

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def residual(self, v) -> np.ndarray:
        """Reduce ``v`` (a vector or a stack of row vectors) against the basis."""
        v = as_bits(v)
        if v.shape[-1] != self.ncols:
            raise ValueError(f"vector length {v.shape[-1]} does not match {self.ncols} columns")
        if self.dim == 0:
            return v.copy()
        coeff = v[..., self.pivots].astype(np.int64)
        return (v ^ ((coeff @ self.basis.astype(np.int64)) & 1).astype(np.uint8)).astype(np.uint8)

    def contains(self, v) -> bool | np.ndarray:
        res = self.residual(v)
        if res.ndim == 1:
            return not res.any()
        return ~res.any(axis=-1)
