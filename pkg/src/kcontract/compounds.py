"""Multiplicative and additive matrix compounds, Kronecker algebra and the
block-diagonal compound decomposition.

The k-th multiplicative compound collects all k x k minors in lexicographic
order; the k-th additive compound is its derivative along the matrix
exponential at t = 0 and is assembled here by the standard entry rule
(single-entry off-diagonals with alternating sign, diagonal sums on the
diagonal).  0-th compounds follow the convention M^(0) = [1], M^[0] = [0].
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from . import _kernels
from .indexing import (
    BlockPermutation,
    _sequences,
    block_range,
    build_permutation,
    check_dimension_guard,
)


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate and return a dense 2-D float array with finite entries."""
    a = np.asarray(m, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains non-finite entries")
    return a


def require_square(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class CompoundMatrix:
    """A k-th compound together with its provenance."""

    base_rows: int
    base_cols: int
    order: int
    kind: str  # "mult" | "add"
    data: np.ndarray


def mult_compound(m, k: int) -> CompoundMatrix:
    """k-th multiplicative compound: entry (a, b) is det(m[rows_a | cols_b]).

    Rows and columns are indexed by the increasing k-sequences over the row
    and column index sets, in lexicographic order.
    """
    a = as_matrix(m)
    rows, cols = a.shape
    if not 0 <= k <= min(rows, cols):
        raise ValueError(f"k must satisfy 0 <= k <= {min(rows, cols)}, got {k}")
    if k == 0:
        return CompoundMatrix(rows, cols, 0, "mult", np.ones((1, 1)))
    check_dimension_guard(comb(rows, k))
    check_dimension_guard(comb(cols, k))
    row_idx = np.array(_sequences(k, rows), dtype=np.int64) - 1
    col_idx = np.array(_sequences(k, cols), dtype=np.int64) - 1
    data = _kernels.minor_dets(a, row_idx, col_idx)
    return CompoundMatrix(rows, cols, k, "mult", data)


@lru_cache(maxsize=None)
def _add_compound_entries(n: int, k: int):
    """Yield (row, col, source_i, source_j, sign) for the off-diagonal entry
    rule of the k-th additive compound, plus sequence list for the diagonal.

    Row sequence alpha maps to column sequence beta when beta replaces the
    s-th element of alpha by a value j outside alpha; the entry is
    (-1)^(s+t) * a[alpha_s, j] with t the position of j within beta.
    """
    seqs = _sequences(k, n)
    pos = {s: i for i, s in enumerate(seqs)}
    moves = []
    for a_idx, alpha in enumerate(seqs):
        members = set(alpha)
        for s, val in enumerate(alpha):
            for j in range(1, n + 1):
                if j in members:
                    continue
                beta = tuple(sorted(members - {val} | {j}))
                t = beta.index(j)
                sign = 1.0 if (s + t) % 2 == 0 else -1.0
                moves.append((a_idx, pos[beta], val - 1, j - 1, sign))
    return seqs, moves


def add_compound(m, k: int) -> CompoundMatrix:
    """k-th additive compound of a square matrix."""
    a = require_square(as_matrix(m))
    n = a.shape[0]
    if not 0 <= k <= n:
        raise ValueError(f"k must satisfy 0 <= k <= {n}, got {k}")
    if k == 0:
        return CompoundMatrix(n, n, 0, "add", np.zeros((1, 1)))
    check_dimension_guard(comb(n, k))
    seqs, moves = _add_compound_entries(n, k)
    r = len(seqs)
    data = np.zeros((r, r))
    diag = np.diag(a)
    for i, alpha in enumerate(seqs):
        data[i, i] = sum(diag[v - 1] for v in alpha)
    for row, col, si, sj, sign in moves:
        data[row, col] = sign * a[si, sj]
    return CompoundMatrix(n, n, k, "add", data)


def add_compound_interval(lo, hi, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Entrywise interval enclosure of A^[k] over all A with lo <= A <= hi.

    Sound because every compound entry is either a sum of diagonal entries
    or a signed copy of a single entry of A.
    """
    lo = require_square(as_matrix(lo, "lo"))
    hi = require_square(as_matrix(hi, "hi"))
    if lo.shape != hi.shape:
        raise ValueError("lo and hi must have identical shapes")
    if np.any(lo > hi):
        raise ValueError("entry bounds must satisfy lo <= hi")
    n = lo.shape[0]
    if not 0 <= k <= n:
        raise ValueError(f"k must satisfy 0 <= k <= {n}, got {k}")
    if k == 0:
        z = np.zeros((1, 1))
        return z, z.copy()
    seqs, moves = _add_compound_entries(n, k)
    r = len(seqs)
    out_lo = np.zeros((r, r))
    out_hi = np.zeros((r, r))
    for i, alpha in enumerate(seqs):
        out_lo[i, i] = sum(lo[v - 1, v - 1] for v in alpha)
        out_hi[i, i] = sum(hi[v - 1, v - 1] for v in alpha)
    for row, col, si, sj, sign in moves:
        if sign > 0:
            out_lo[row, col] = lo[si, sj]
            out_hi[row, col] = hi[si, sj]
        else:
            out_lo[row, col] = -hi[si, sj]
            out_hi[row, col] = -lo[si, sj]
    return out_lo, out_hi


def kron_product(a, b) -> np.ndarray:
    """Kronecker product A (x) B."""
    return np.kron(as_matrix(a), as_matrix(b))


def kron_sum(a, b) -> np.ndarray:
    """Kronecker sum A (+) B = A (x) I_m + I_n (x) B for square A, B."""
    a = require_square(as_matrix(a, "A"), "A")
    b = require_square(as_matrix(b, "B"), "B")
    n, m = a.shape[0], b.shape[0]
    return np.kron(a, np.eye(m)) + np.kron(np.eye(n), b)


@dataclass(frozen=True)
class BlockDecomposition:
    """Compound of diag(A, B) as a permutation-conjugated block diagonal.

    ``blocks`` lists (i, block) for i = i1..i2, where block i couples the
    (k-i)-compound of A with the i-compound of B (Kronecker product for the
    multiplicative case, Kronecker sum for the additive case).
    """

    kind: str
    k: int
    n: int
    m: int
    permutation: BlockPermutation
    blocks: list[tuple[int, np.ndarray]]
    i1: int
    i2: int

    def block_diagonal(self) -> np.ndarray:
        sizes = [b.shape[0] for _, b in self.blocks]
        r = sum(sizes)
        out = np.zeros((r, r))
        at = 0
        for (_, b), s in zip(self.blocks, sizes):
            out[at : at + s, at : at + s] = b
            at += s
        return out

    def reconstruct(self) -> np.ndarray:
        """P diag(blocks) P^{-1}, the compound of diag(A, B) in standard order."""
        return self.permutation.unconjugate(self.block_diagonal())

    def partition(self) -> list[int]:
        return [b.shape[0] for _, b in self.blocks]


def _block_decompose(a, b, k: int, kind: str) -> BlockDecomposition:
    a = require_square(as_matrix(a, "A"), "A")
    b = require_square(as_matrix(b, "B"), "B")
    n, m = a.shape[0], b.shape[0]
    if not 1 <= k <= n + m:
        raise ValueError(f"k must satisfy 1 <= k <= {n + m}, got {k}")
    check_dimension_guard(comb(n + m, k))
    perm = build_permutation(k, n, m)
    i1, i2 = block_range(k, n, m)
    blocks = []
    for i in range(i1, i2 + 1):
        if kind == "mult":
            blk = kron_product(mult_compound(a, k - i).data, mult_compound(b, i).data)
        else:
            blk = kron_sum(add_compound(a, k - i).data, add_compound(b, i).data)
        blocks.append((i, blk))
    return BlockDecomposition(kind, k, n, m, perm, blocks, i1, i2)


def block_diag_mult_decompose(a, b, k: int) -> BlockDecomposition:
    """diag(A, B)^(k) = P diag_i(A^(k-i) (x) B^(i)) P^{-1}."""
    return _block_decompose(a, b, k, "mult")


def block_diag_add_decompose(a, b, k: int) -> BlockDecomposition:
    """diag(A, B)^[k] = P diag_i(A^[k-i] (+) B^[i]) P^{-1}."""
    return _block_decompose(a, b, k, "add")
