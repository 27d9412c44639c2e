"""Scalar MT19937: seeding, block regeneration, tempering.

This is the bit-exact reference generator. Everything else in the package
(the GF(2) transition matrix, jump-ahead, the interleaved engine) is checked
against it.

The state is a circular buffer of ``n`` words plus a consumption cursor.
Regeneration replaces all ``n`` words at once, split into three loops so no
buffer index ever needs a modulo.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Mt19937Params",
    "MT19937",
    "Mt19937State",
    "seed_state",
    "temper",
    "mul_A",
    "regen_loops",
    "regenerate",
    "next_u32",
    "step_words",
    "effective_dim",
    "state_to_effective",
    "effective_to_state",
]

_SEED_MULTIPLIER = 1812433253


@dataclass(frozen=True)
class Mt19937Params:
    """Constants of a Mersenne-Twister-style generator.

    The defaults are the MT19937 values. Small toy values (e.g. ``w=8``,
    ``n=4``) are accepted so the linear-algebra code can be checked
    exhaustively on tiny states.
    """

    w: int = 32
    n: int = 624
    m: int = 397
    r: int = 31
    a: int = 0x9908B0DF
    # tempering: (shift, mask) pairs, then the final right shift
    temper_shift1: int = 11
    temper_mask1: int = 0xFFFFFFFF
    temper_shift2: int = 7
    temper_mask2: int = 0x9D2C5680
    temper_shift3: int = 15
    temper_mask3: int = 0xEFC60000
    temper_shift4: int = 18

    def __post_init__(self):
        if self.w < 1:
            raise ValueError(f"word width must be positive, got {self.w}")
        if not 0 <= self.r <= self.w - 1:
            raise ValueError(f"split point r={self.r} outside [0, {self.w - 1}]")
        if not 0 <= self.m < self.n:
            raise ValueError(f"offset m={self.m} outside [0, {self.n})")
        if not 0 <= self.a <= self.word_mask:
            raise ValueError("matrix word a does not fit in w bits")

    @property
    def word_mask(self) -> int:
        return (1 << self.w) - 1

    @property
    def upper_mask(self) -> int:
        """h: bits r..w-1."""
        return self.word_mask ^ self.lower_mask

    @property
    def lower_mask(self) -> int:
        """l: bits 0..r-1."""
        return (1 << self.r) - 1

    @property
    def effective_dim(self) -> int:
        return self.n * self.w - self.r


MT19937 = Mt19937Params()


@dataclass
class Mt19937State:
    """One scalar generator: ``n`` stored words and a consumption cursor.

    ``cursor == n`` means every stored word has been handed out, so the next
    query regenerates. That is also the only position at which the stored
    words are fully described by the effective state (see
    :func:`state_to_effective`).
    """

    words: np.ndarray
    cursor: int
    params: Mt19937Params = field(default=MT19937, repr=False)

    def __post_init__(self):
        self.words = np.ascontiguousarray(self.words, dtype=np.uint32 if self.params.w <= 32 else np.uint64)
        if self.words.shape != (self.params.n,):
            raise ValueError(f"expected {self.params.n} words, got shape {self.words.shape}")
        if not 0 <= self.cursor <= self.params.n:
            raise ValueError(f"cursor {self.cursor} outside [0, {self.params.n}]")

    def copy(self) -> Mt19937State:
        return Mt19937State(self.words.copy(), self.cursor, self.params)

    def __iter__(self):
        while True:
            yield next_u32(self)


def seed_state(seed: int, params: Mt19937Params = MT19937) -> Mt19937State:
    """Knuth-multiplier initializer (the 2002 reference ``init_genrand``)."""
    if params.w != 32:
        raise ValueError("seed_state is defined for 32-bit words only")
    x = [0] * params.n
    x[0] = seed & 0xFFFFFFFF
    for i in range(1, params.n):
        prev = x[i - 1]
        x[i] = (_SEED_MULTIPLIER * (prev ^ (prev >> 30)) + i) & 0xFFFFFFFF
    return Mt19937State(np.array(x, dtype=np.uint32), params.n, params)


def temper(x: int, params: Mt19937Params = MT19937) -> int:
    mask = params.word_mask
    y = x ^ ((x >> params.temper_shift1) & params.temper_mask1)
    y ^= (y << params.temper_shift2) & params.temper_mask2
    y ^= (y << params.temper_shift3) & params.temper_mask3
    return (y ^ (y >> params.temper_shift4)) & mask


def mul_A(u: int, params: Mt19937Params = MT19937) -> int:
    """Product of the row word ``u`` with the companion matrix A.

    Branch-free: the low bit is widened into an all-ones/all-zeros mask.
    """
    return (u >> 1) ^ (-(u & 1) & params.a)


def regen_loops(params: Mt19937Params = MT19937) -> tuple[range, range, range]:
    """Index ranges of the three modulo-free regeneration sub-loops.

    For MT19937 these have lengths 227, 396 and 1.
    """
    n, m = params.n, params.m
    return range(0, n - m), range(n - m, n - 1), range(n - 1, n)


def regenerate(state: Mt19937State) -> Mt19937State:
    """Replace all ``n`` words in place and reset the cursor."""
    p = state.params
    h, lo = p.upper_mask, p.lower_mask
    n, m, a = p.n, p.m, p.a
    x = state.words.tolist()
    first, second, last = regen_loops(p)
    for k in first:
        y = (x[k] & h) | (x[k + 1] & lo)
        x[k] = x[k + m] ^ (y >> 1) ^ (-(y & 1) & a)
    for k in second:
        y = (x[k] & h) | (x[k + 1] & lo)
        x[k] = x[k + m - n] ^ (y >> 1) ^ (-(y & 1) & a)
    for k in last:
        y = (x[k] & h) | (x[0] & lo)
        x[k] = x[k + m - n] ^ (y >> 1) ^ (-(y & 1) & a)
    state.words[:] = x
    state.cursor = 0
    return state


def next_u32(state: Mt19937State) -> int:
    if state.cursor == state.params.n:
        regenerate(state)
    x = int(state.words[state.cursor])
    state.cursor += 1
    return temper(x, state.params)


def step_words(words, params: Mt19937Params = MT19937) -> list[int]:
    """One step of the recurrence on a logically ordered word list.

    Returns ``[x1, ..., x_{n-1}, x_n]`` for input ``[x0, ..., x_{n-1}]``.
    """
    x = [int(v) for v in words]
    y = (x[0] & params.upper_mask) | (x[1 % params.n] & params.lower_mask)
    return x[1:] + [x[params.m] ^ mul_A(y, params)]


def effective_dim(params: Mt19937Params = MT19937) -> int:
    return params.effective_dim


def _check_boundary(state: Mt19937State):
    if state.cursor != state.params.n:
        raise ValueError(
            "effective state is only defined on a fully consumed block "
            f"(cursor == {state.params.n}), got cursor {state.cursor}"
        )


def state_to_effective(state: Mt19937State):
    """Pack the ``n*w - r`` live bits into an :class:`~vmt19937.gf2.F2Vector`.

    Bit order: bits ``r..w-1`` of ``words[0]``, then bits ``0..w-1`` of
    ``words[1]``, ``words[2]``, ... (least significant first).
    """
    from .gf2 import F2Vector

    _check_boundary(state)
    p = state.params
    bits = _words_to_bits(state.words, p.w)
    return F2Vector.from_bits(bits[p.r:])


def effective_to_state(vec, params: Mt19937Params = MT19937) -> Mt19937State:
    """Inverse of :func:`state_to_effective`; the dead low bits come back as zero.

    An all-zero vector is returned as an all-zero (degenerate) state; callers
    that need a usable generator must check for it.
    """
    if vec.nbits != params.effective_dim:
        raise ValueError(f"expected a {params.effective_dim}-bit vector, got {vec.nbits}")
    bits = np.concatenate([np.zeros(params.r, dtype=np.uint8), vec.to_bits()])
    words = _bits_to_words(bits, params.w)
    return Mt19937State(words, params.n, params)


def _words_to_bits(words: np.ndarray, w: int) -> np.ndarray:
    words = np.asarray(words, dtype=np.uint64)
    shifts = np.arange(w, dtype=np.uint64)
    return ((words[:, None] >> shifts) & np.uint64(1)).astype(np.uint8).ravel()


def _bits_to_words(bits: np.ndarray, w: int) -> np.ndarray:
    weights = np.uint64(1) << np.arange(w, dtype=np.uint64)
    words = (bits.reshape(-1, w).astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)
    return words.astype(np.uint32 if w <= 32 else np.uint64)
