"""Dense, bit-packed linear algebra over GF(2).

Vectors and matrix rows are stored as little-endian 64-bit words, least
significant bit first, with the padding bits past ``nbits`` held at zero.

Matrices act on row vectors from the right: ``v * M`` is the XOR of the rows
of ``M`` selected by the set bits of ``v``. Matrix products use the method
of four Russians (8-bit tables, one 64-bit column word at a time), compiled
with numba.
"""

from __future__ import annotations

from typing import Callable, Optional

import numba
import numpy as np

from .mt import MT19937, Mt19937Params

__all__ = [
    "F2Vector",
    "F2Matrix",
    "build_F",
    "vec_mat_mul",
    "mat_mul",
    "mat_pow2",
]

_WORD = np.dtype("<u8")


def _nwords(nbits: int) -> int:
    return (nbits + 63) // 64


def _tail_mask(nbits: int) -> np.uint64:
    rem = nbits % 64
    return np.uint64(0xFFFFFFFFFFFFFFFF if rem == 0 else (1 << rem) - 1)


class F2Vector:
    """A binary vector of ``nbits`` bits."""

    __slots__ = ("nbits", "words")

    def __init__(self, nbits: int, words: np.ndarray):
        words = np.ascontiguousarray(words, dtype=_WORD)
        if words.shape != (_nwords(nbits),):
            raise ValueError(f"{nbits} bits need {_nwords(nbits)} words, got {words.shape}")
        if nbits and words[-1] & ~_tail_mask(nbits):
            raise ValueError("padding bits past nbits must be zero")
        self.nbits = nbits
        self.words = words

    @classmethod
    def zeros(cls, nbits: int) -> F2Vector:
        return cls(nbits, np.zeros(_nwords(nbits), dtype=_WORD))

    @classmethod
    def from_bits(cls, bits) -> F2Vector:
        bits = np.asarray(bits, dtype=np.uint8)
        nbits = bits.size
        packed = np.packbits(bits, bitorder="little")
        buf = np.zeros(_nwords(nbits) * 8, dtype=np.uint8)
        buf[: packed.size] = packed
        return cls(nbits, buf.view(_WORD))

    @classmethod
    def from_int(cls, value: int, nbits: int) -> F2Vector:
        if value < 0 or value >> nbits:
            raise ValueError(f"{value} does not fit in {nbits} bits")
        raw = value.to_bytes(_nwords(nbits) * 8, "little")
        return cls(nbits, np.frombuffer(raw, dtype=_WORD).copy())

    @classmethod
    def random(cls, nbits: int, rng: np.random.Generator) -> F2Vector:
        return cls.from_bits(rng.integers(0, 2, size=nbits, dtype=np.uint8))

    def to_bits(self) -> np.ndarray:
        return np.unpackbits(self.words.view(np.uint8), bitorder="little")[: self.nbits]

    def to_int(self) -> int:
        return int.from_bytes(self.words.tobytes(), "little")

    def support(self) -> np.ndarray:
        """Indices of the set bits, ascending."""
        return np.flatnonzero(self.to_bits())

    def popcount(self) -> int:
        return int(self.to_bits().sum())

    def padding_ok(self) -> bool:
        return not self.nbits or not (self.words[-1] & ~_tail_mask(self.nbits))

    def __xor__(self, other: F2Vector) -> F2Vector:
        if self.nbits != other.nbits:
            raise ValueError("dimension mismatch")
        return F2Vector(self.nbits, self.words ^ other.words)

    def __eq__(self, other):
        if not isinstance(other, F2Vector):
            return NotImplemented
        return self.nbits == other.nbits and np.array_equal(self.words, other.words)

    def __repr__(self):
        return f"F2Vector(nbits={self.nbits}, popcount={self.popcount()})"


class F2Matrix:
    """A square ``dim x dim`` binary matrix stored as packed rows."""

    __slots__ = ("dim", "rows")

    def __init__(self, rows: np.ndarray, dim: Optional[int] = None):
        rows = np.ascontiguousarray(rows, dtype=_WORD)
        if rows.ndim != 2:
            raise ValueError("rows must be a 2-d word array")
        dim = rows.shape[0] if dim is None else dim
        if dim <= 0:
            raise ValueError("matrix dimension must be positive")
        if rows.shape != (dim, _nwords(dim)):
            raise ValueError(f"expected row array of shape {(dim, _nwords(dim))}, got {rows.shape}")
        self.dim = dim
        self.rows = rows

    @classmethod
    def zeros(cls, dim: int) -> F2Matrix:
        return cls(np.zeros((dim, _nwords(dim)), dtype=_WORD))

    @classmethod
    def identity(cls, dim: int) -> F2Matrix:
        out = cls.zeros(dim)
        idx = np.arange(dim)
        out.rows[idx, idx // 64] = np.uint64(1) << (idx % 64).astype(np.uint64)
        return out

    @classmethod
    def from_dense(cls, bits) -> F2Matrix:
        bits = np.asarray(bits, dtype=np.uint8)
        dim = bits.shape[0]
        if bits.shape != (dim, dim):
            raise ValueError("dense matrix must be square")
        return cls(np.stack([F2Vector.from_bits(row).words for row in bits]))

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator) -> F2Matrix:
        return cls.from_dense(rng.integers(0, 2, size=(dim, dim), dtype=np.uint8))

    def to_dense(self) -> np.ndarray:
        return np.unpackbits(self.rows.view(np.uint8), axis=1, bitorder="little")[:, : self.dim]

    def row(self, i: int) -> F2Vector:
        return F2Vector(self.dim, self.rows[i].copy())

    def padding_ok(self) -> bool:
        return not np.any(self.rows[:, -1] & ~_tail_mask(self.dim))

    def __matmul__(self, other: F2Matrix) -> F2Matrix:
        return mat_mul(self, other)

    def __eq__(self, other):
        if not isinstance(other, F2Matrix):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.rows, other.rows)

    def __repr__(self):
        return f"F2Matrix(dim={self.dim})"


def build_F(params: Mt19937Params = MT19937) -> F2Matrix:
    """One-step transition matrix on the effective state.

    ``state_to_effective(step(s)) == state_to_effective(s) * F`` with the bit
    layout of :func:`vmt19937.mt.state_to_effective`.
    """
    w, n, m, r, a = params.w, params.n, params.m, params.r, params.a
    if n < 2 or m < 1:
        raise ValueError("need n >= 2 and m >= 1: the low bits of the first word are not state")
    dim = params.effective_dim
    head = w - r
    out = F2Matrix.zeros(dim)
    rows = out.rows

    def pos(word, bit):
        return bit - r if word == 0 else head + (word - 1) * w + bit

    def flip(row, col):
        rows[row, col // 64] ^= np.uint64(1) << np.uint64(col % 64)

    last = pos(n - 1, 0)

    def feed_u(row, bit):
        # u bit `bit` -> (u >> 1) ^ (u & 1) * a, landing in the new last word
        if bit:
            flip(row, last + bit - 1)
        else:
            for j in range(w):
                if (a >> j) & 1:
                    flip(row, last + j)

    for b in range(r, w):
        feed_u(pos(0, b), b)
    for b in range(w):
        src = pos(1, b)
        if b >= r:
            flip(src, pos(0, b))
        else:
            feed_u(src, b)
    for j in range(2, n):
        for b in range(w):
            flip(pos(j, b), pos(j - 1, b))
    for b in range(w):
        flip(pos(m, b), last + b)
    return out


def vec_mat_mul(v: F2Vector, M: F2Matrix) -> F2Vector:
    if v.nbits != M.dim:
        raise ValueError(f"vector has {v.nbits} bits, matrix is {M.dim}x{M.dim}")
    sel = v.support()
    if sel.size == 0:
        return F2Vector.zeros(M.dim)
    return F2Vector(M.dim, np.bitwise_xor.reduce(M.rows[sel], axis=0))


def _build_tables(B, g, T):
    d, nw = B.shape
    for j in range(8):
        base = 64 * g + 8 * j
        Tj = T[j]
        for idx in range(1, 256):
            low = idx & (-idx)
            bit = 0
            while (1 << bit) != low:
                bit += 1
            src = Tj[idx ^ low]
            dst = Tj[idx]
            r = base + bit
            if r < d:
                row = B[r]
                for k in range(nw):
                    dst[k] = src[k] ^ row[k]
            else:
                for k in range(nw):
                    dst[k] = src[k]


def _apply_row(T, a, c):
    t0 = T[0, a & 0xFF]
    t1 = T[1, (a >> 8) & 0xFF]
    t2 = T[2, (a >> 16) & 0xFF]
    t3 = T[3, (a >> 24) & 0xFF]
    t4 = T[4, (a >> 32) & 0xFF]
    t5 = T[5, (a >> 40) & 0xFF]
    t6 = T[6, (a >> 48) & 0xFF]
    t7 = T[7, (a >> 56) & 0xFF]
    for k in range(c.shape[0]):
        c[k] ^= t0[k] ^ t1[k] ^ t2[k] ^ t3[k] ^ t4[k] ^ t5[k] ^ t6[k] ^ t7[k]


_build_tables_jit = numba.njit(cache=True, nogil=True)(_build_tables)
_apply_row_jit = numba.njit(cache=True, nogil=True, inline="always")(_apply_row)


@numba.njit(cache=True, nogil=True)
def _m4rm_serial(A, B, C):
    T = np.zeros((8, 256, B.shape[1]), dtype=np.uint64)
    for g in range(A.shape[1]):
        _build_tables_jit(B, g, T)
        for i in range(A.shape[0]):
            a = A[i, g]
            if a != 0:
                _apply_row_jit(T, a, C[i])


@numba.njit(cache=True, nogil=True, parallel=True)
def _m4rm_parallel(A, B, C):
    T = np.zeros((8, 256, B.shape[1]), dtype=np.uint64)
    for g in range(A.shape[1]):
        _build_tables_jit(B, g, T)
        for i in numba.prange(A.shape[0]):
            a = A[i, g]
            if a != 0:
                _apply_row_jit(T, a, C[i])


def mat_mul(A: F2Matrix, B: F2Matrix, *, parallel: bool = False) -> F2Matrix:
    """Row ``i`` of the product is ``A.row(i) * B``.

    ``parallel=True`` fans rows out across numba worker threads; the bits
    are identical either way.
    """
    if A.dim != B.dim:
        raise ValueError(f"dimension mismatch: {A.dim} vs {B.dim}")
    C = np.zeros_like(A.rows)
    (_m4rm_parallel if parallel else _m4rm_serial)(A.rows, B.rows, C)
    return F2Matrix(C, A.dim)


def mat_pow2(
    M: F2Matrix,
    q: int,
    checkpoint: Optional[Callable[[int, F2Matrix], None]] = None,
    *,
    start: int = 0,
    parallel: bool = False,
) -> F2Matrix:
    """``M`` raised to ``2**q`` by ``q`` squarings.

    ``checkpoint(done, matrix)`` is called after every squaring, where
    ``done`` counts squarings from the original base (``start`` lets a
    resumed run keep counting from a checkpoint).
    """
    if q < 0:
        raise ValueError(f"q must be non-negative, got {q}")
    for i in range(q):
        M = mat_mul(M, M, parallel=parallel)
        if checkpoint is not None:
            checkpoint(start + i + 1, M)
    return M
