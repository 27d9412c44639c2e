"""Lane-group kernels for the interleaved generator.

State layout: ``x`` is a flat uint32 array of ``n * lanes`` words; lane group
``k`` (words ``k*lanes .. k*lanes + lanes - 1``) holds word ``k`` of every
lane. Every recurrence operand is therefore one contiguous group, and each
``for t in range(lanes)`` loop below is a single M-lane vector operation.

Two interchangeable backends share the array layout and cursor protocol:

* ``numba``: compiled kernels specialized per lane count (the lane loop has
  a compile-time trip count, so LLVM is free to map it onto SIMD registers).
  Buffer refills and 16-lane groups use explicit LLVM vector intrinsics.
* ``numpy``: a portable fallback that runs the same three sub-loops on
  batches of lane groups with numpy array operations.

Cursor array ``cur`` (int64[2]): ``cur[0]`` words used from the 16-word
tempered buffer, ``cur[1]`` words of ``x`` already tempered. Compiled drivers
copy both into locals for the duration of a call.
"""

from __future__ import annotations

import functools
from types import SimpleNamespace

import numba
import numpy as np
from llvmlite import ir
from numba.core import types
from numba.core.errors import TypingError
from numba.extending import intrinsic

from .mt import MT19937, regen_loops

BUFFER_WORDS = 16
ALIGN = 64

_P = MT19937
_N, _M = _P.n, _P.m
_UPPER = np.uint32(_P.upper_mask)
_LOWER = np.uint32(_P.lower_mask)
_A = np.uint32(_P.a)
_T1, _T2, _T3, _T4 = (np.uint32(v) for v in (_P.temper_shift1, _P.temper_shift2, _P.temper_shift3, _P.temper_shift4))
_C1, _C2, _C3 = (np.uint32(v) for v in (_P.temper_mask1, _P.temper_mask2, _P.temper_mask3))
_ONE = np.uint32(1)
_ZERO = np.uint32(0)


def aligned_empty(count: int, dtype=np.uint32, align: int = ALIGN) -> np.ndarray:
    """1-d array whose data pointer is a multiple of ``align`` bytes."""
    dtype = np.dtype(dtype)
    raw = np.empty(count * dtype.itemsize + align, dtype=np.uint8)
    offset = (-raw.ctypes.data) % align
    return raw[offset : offset + count * dtype.itemsize].view(dtype)


def new_state_arrays(lanes: int):
    x = aligned_empty(_N * lanes)
    buf = aligned_empty(BUFFER_WORDS)
    buf[:] = 0
    cur = np.array([BUFFER_WORDS, _N * lanes], dtype=np.int64)
    return x, buf, cur


@numba.njit(inline="always")
def _temper(y):
    y ^= (y >> _T1) & _C1
    y ^= (y << _T2) & _C2
    y ^= (y << _T3) & _C3
    return y ^ (y >> _T4)


def _as_i32(v: int) -> int:
    return v - (1 << 32) if v >= 1 << 31 else v


@intrinsic
def temper16(typingctx, src, start, dst, dst_start):
    """``dst[d:d+16] = temper(src[s:s+16])`` as one 16-lane vector operation.

    Emitted as LLVM ``<16 x i32>`` arithmetic, which the backend splits into
    whatever vector registers the host has (one AVX-512 op, two AVX2 ops,
    four SSE/NEON ops). A plain 16-trip loop is instead fully unrolled into
    scalar code. No bounds checks: callers guarantee 16 words on both sides.
    """
    for arr in (src, dst):
        if not (isinstance(arr, types.Array) and arr.ndim == 1 and arr.dtype == types.uint32 and arr.layout == "C"):
            raise TypingError(f"temper16 needs contiguous 1-d uint32 arrays, got {arr}")

    def codegen(context, builder, signature, args):
        s_arr = context.make_array(signature.args[0])(context, builder, args[0])
        d_arr = context.make_array(signature.args[2])(context, builder, args[2])
        vec = ir.VectorType(ir.IntType(32), BUFFER_WORDS)

        def splat(c):
            return ir.Constant(vec, [ir.Constant(ir.IntType(32), _as_i32(int(c)))] * BUFFER_WORDS)

        sp = builder.bitcast(builder.gep(s_arr.data, [args[1]]), vec.as_pointer())
        dp = builder.bitcast(builder.gep(d_arr.data, [args[3]]), vec.as_pointer())
        y = builder.load(sp, align=4)
        y = builder.xor(y, builder.and_(builder.lshr(y, splat(_T1)), splat(_C1)))
        y = builder.xor(y, builder.and_(builder.shl(y, splat(_T2)), splat(_C2)))
        y = builder.xor(y, builder.and_(builder.shl(y, splat(_T3)), splat(_C3)))
        y = builder.xor(y, builder.lshr(y, splat(_T4)))
        builder.store(y, dp, align=4)
        return context.get_dummy_value()

    return types.void(src, start, dst, dst_start), codegen


# Lane counts from which the recurrence uses an explicit <lanes x i32> vector
# step. Narrower groups are left to LLVM, which vectorizes the plain lane loop
# across neighbouring groups and beats a fixed-width step there; at 16 lanes
# its code for the plain loop is several times slower than the explicit form.
EXPLICIT_VECTOR_LANES = 16


def _vector_group_step(lanes: int):
    """``x[b:b+L] = x[bm:bm+L] ^ mix(x[b:b+L], x[b1:b1+L])`` as one vector op."""

    @intrinsic
    def group_step(typingctx, x, b, b1, bm):
        def codegen(context, builder, signature, args):
            arr = context.make_array(signature.args[0])(context, builder, args[0])
            vec = ir.VectorType(ir.IntType(32), lanes)

            def splat(c):
                return ir.Constant(vec, [ir.Constant(ir.IntType(32), _as_i32(int(c)))] * lanes)

            def ptr(offset):
                return builder.bitcast(builder.gep(arr.data, [offset]), vec.as_pointer())

            xk = builder.load(ptr(args[1]), align=4)
            xk1 = builder.load(ptr(args[2]), align=4)
            xm = builder.load(ptr(args[3]), align=4)
            y = builder.or_(builder.and_(xk, splat(_UPPER)), builder.and_(xk1, splat(_LOWER)))
            odd = builder.sub(splat(0), builder.and_(y, splat(1)))
            mixed = builder.xor(builder.lshr(y, splat(1)), builder.and_(odd, splat(_A)))
            builder.store(builder.xor(xm, mixed), ptr(args[1]), align=4)
            return context.get_dummy_value()

        return types.void(x, b, b1, bm), codegen

    return group_step


@functools.lru_cache(maxsize=None)
def numba_kernels(lanes: int) -> SimpleNamespace:
    L = lanes
    NL = _N * L
    first, second, _ = regen_loops(_P)
    lo1, hi1 = first.start, first.stop
    lo2, hi2 = second.start, second.stop

    if L >= EXPLICIT_VECTOR_LANES:
        vector_step = _vector_group_step(L)

        @numba.njit(inline="always")
        def group_step(x, k, k1, km):
            vector_step(x, k * L, k1 * L, km * L)

    else:

        @numba.njit(inline="always")
        def group_step(x, k, k1, km):
            b, b1, bm = k * L, k1 * L, km * L
            for t in range(L):
                y = (x[b + t] & _UPPER) | (x[b1 + t] & _LOWER)
                # odd/even select as an all-ones/all-zeros lane mask
                x[b + t] = x[bm + t] ^ (y >> _ONE) ^ ((_ZERO - (y & _ONE)) & _A)

    @numba.njit(nogil=True)
    def regenerate(x):
        for k in range(lo1, hi1):
            group_step(x, k, k + 1, k + _M)
        for k in range(lo2, hi2):
            group_step(x, k, k + 1, k + _M - _N)
        group_step(x, _N - 1, 0, _M - 1)

    @numba.njit(nogil=True, inline="always")
    def temper_into(src, start, dst, dst_start, count):
        for i in range(count):
            dst[dst_start + i] = _temper(src[start + i])

    # Cursor handling is written out in each driver loop rather than called
    # through small helpers returning (value, cursor) tuples: numba compiles
    # those into code several times slower than the open-coded form.

    @numba.njit(nogil=True)
    def refill_cur(x, buf, cur):
        sc = cur[1]
        if sc == NL:
            regenerate(x)
            sc = 0
        temper16(x, sc, buf, 0)
        cur[0], cur[1] = 0, sc + BUFFER_WORDS

    @numba.njit(nogil=True)
    def next_block16_cur(x, buf, cur, out, off):
        bc, sc = cur[0], cur[1]
        if bc == BUFFER_WORDS:
            # buffer empty: temper straight from the state, skipping the staging copy
            if sc == NL:
                regenerate(x)
                sc = 0
            temper16(x, sc, out, off)
            sc += BUFFER_WORDS
        else:
            for i in range(BUFFER_WORDS):
                if bc == BUFFER_WORDS:
                    if sc == NL:
                        regenerate(x)
                        sc = 0
                    temper16(x, sc, buf, 0)
                    sc += BUFFER_WORDS
                    bc = 0
                out[off + i] = buf[bc]
                bc += 1
        cur[0], cur[1] = bc, sc

    @numba.njit(nogil=True)
    def next_block_state_cur(x, buf, cur, out, off):
        regenerate(x)
        temper_into(x, 0, out, off, NL)
        cur[1] = NL

    @numba.njit(nogil=True)
    def fill_single(x, buf, cur, out):
        bc, sc = cur[0], cur[1]
        for i in range(out.shape[0]):
            if bc == BUFFER_WORDS:
                if sc == NL:
                    regenerate(x)
                    sc = 0
                temper16(x, sc, buf, 0)
                sc += BUFFER_WORDS
                bc = 0
            out[i] = buf[bc]
            bc += 1
        cur[0], cur[1] = bc, sc

    @numba.njit(nogil=True)
    def checksum_single(x, buf, cur, count):
        bc, sc = cur[0], cur[1]
        acc = np.uint32(0)
        for _ in range(count):
            if bc == BUFFER_WORDS:
                if sc == NL:
                    regenerate(x)
                    sc = 0
                temper16(x, sc, buf, 0)
                sc += BUFFER_WORDS
                bc = 0
            acc ^= buf[bc]
            bc += 1
        cur[0], cur[1] = bc, sc
        return acc

    @numba.njit(nogil=True)
    def fill_block16(x, buf, cur, out):
        n = out.shape[0]
        full = n - n % BUFFER_WORDS
        off = 0
        # drain a partly used buffer so the rest runs on the fast path
        while off < full and cur[0] != BUFFER_WORDS:
            next_block16_cur(x, buf, cur, out, off)
            off += BUFFER_WORDS
        sc = cur[1]
        # one pass per regeneration keeps the inner loop free of the wrap test
        while off < full:
            if sc == NL:
                regenerate(x)
                sc = 0
            stop = min(NL, sc + (full - off))
            for s in range(sc, stop, BUFFER_WORDS):
                temper16(x, s, out, off)
                off += BUFFER_WORDS
            sc = stop
        cur[1] = sc
        if full < n:
            fill_single(x, buf, cur, out[full:])

    @numba.njit(nogil=True)
    def fill_block_state(x, buf, cur, out):
        for off in range(0, out.shape[0], NL):
            next_block_state_cur(x, buf, cur, out, off)

    @numba.njit(nogil=True)
    def checksum_block16(x, buf, cur, count):
        out = np.empty(BUFFER_WORDS, dtype=np.uint32)
        acc = np.uint32(0)
        done = 0
        while done + BUFFER_WORDS <= count and cur[0] != BUFFER_WORDS:
            next_block16_cur(x, buf, cur, out, 0)
            for i in range(BUFFER_WORDS):
                acc ^= out[i]
            done += BUFFER_WORDS
        sc = cur[1]
        full = count - (count - done) % BUFFER_WORDS
        while done < full:
            if sc == NL:
                regenerate(x)
                sc = 0
            stop = min(NL, sc + (full - done))
            for s in range(sc, stop, BUFFER_WORDS):
                temper16(x, s, out, 0)
                for i in range(BUFFER_WORDS):
                    acc ^= out[i]
            done += stop - sc
            sc = stop
        cur[1] = sc
        if done < count:
            acc ^= checksum_single(x, buf, cur, count - done)
        return acc

    @numba.njit(nogil=True)
    def checksum_block_state(x, buf, cur, count):
        out = np.empty(NL, dtype=np.uint32)
        acc = np.uint32(0)
        done = 0
        while done < count:
            next_block_state_cur(x, buf, cur, out, 0)
            take = min(NL, count - done)
            for i in range(take):
                acc ^= out[i]
            done += take
        return acc

    return SimpleNamespace(
        lanes=L,
        regenerate=regenerate,
        refill=refill_cur,
        next_block16=next_block16_cur,
        next_block_state=next_block_state_cur,
        fill_single=fill_single,
        fill_block16=fill_block16,
        fill_block_state=fill_block_state,
        checksum_single=checksum_single,
        checksum_block16=checksum_block16,
        checksum_block_state=checksum_block_state,
    )


def _np_temper(y: np.ndarray) -> np.ndarray:
    y = y ^ ((y >> _T1) & _C1)
    y ^= (y << _T2) & _C2
    y ^= (y << _T3) & _C3
    return y ^ (y >> _T4)


def _np_mix(cur: np.ndarray, nxt: np.ndarray) -> np.ndarray:
    y = (cur & _UPPER) | (nxt & _LOWER)
    return (y >> _ONE) ^ ((_ZERO - (y & _ONE)) & _A)


@functools.lru_cache(maxsize=None)
def numpy_kernels(lanes: int) -> SimpleNamespace:
    L = lanes
    NL = _N * L
    first, second, _ = regen_loops(_P)
    batch = first.stop - first.start  # n - m: widest batch whose sources are all ready

    def regenerate(x):
        X = x.reshape(_N, L)
        X[first.start : first.stop] = X[first.start + _M : first.stop + _M] ^ _np_mix(
            X[first.start : first.stop], X[first.start + 1 : first.stop + 1]
        )
        for lo in range(second.start, second.stop, batch):
            hi = min(lo + batch, second.stop)
            X[lo:hi] = X[lo + _M - _N : hi + _M - _N] ^ _np_mix(X[lo:hi], X[lo + 1 : hi + 1])
        X[_N - 1] = X[_M - 1] ^ _np_mix(X[_N - 1], X[0])

    def refill(x, buf, cur):
        if cur[1] == NL:
            regenerate(x)
            cur[1] = 0
        buf[:] = _np_temper(x[cur[1] : cur[1] + BUFFER_WORDS])
        cur[1] += BUFFER_WORDS
        cur[0] = 0

    def next_block16(x, buf, cur, out, off):
        if cur[0] == BUFFER_WORDS:
            if cur[1] == NL:
                regenerate(x)
                cur[1] = 0
            out[off : off + BUFFER_WORDS] = _np_temper(x[cur[1] : cur[1] + BUFFER_WORDS])
            cur[1] += BUFFER_WORDS
        else:
            for i in range(BUFFER_WORDS):
                if cur[0] == BUFFER_WORDS:
                    refill(x, buf, cur)
                out[off + i] = buf[cur[0]]
                cur[0] += 1

    def next_block_state(x, buf, cur, out, off):
        regenerate(x)
        out[off : off + NL] = _np_temper(x)
        cur[1] = NL

    def fill_single(x, buf, cur, out):
        i, n = 0, out.shape[0]
        while i < n:
            if cur[0] == BUFFER_WORDS:
                refill(x, buf, cur)
            take = min(BUFFER_WORDS - int(cur[0]), n - i)
            out[i : i + take] = buf[cur[0] : cur[0] + take]
            cur[0] += take
            i += take

    def fill_block16(x, buf, cur, out):
        n = out.shape[0]
        full = n - n % BUFFER_WORDS
        for off in range(0, full, BUFFER_WORDS):
            next_block16(x, buf, cur, out, off)
        fill_single(x, buf, cur, out[full:])

    def fill_block_state(x, buf, cur, out):
        for off in range(0, out.shape[0], NL):
            next_block_state(x, buf, cur, out, off)

    def _checksum(fill, block):
        def run(x, buf, cur, count):
            acc = np.uint32(0)
            done = 0
            out = np.empty(block, dtype=np.uint32)
            while done < count:
                take = min(block, count - done)
                if fill is fill_block_state:
                    fill(x, buf, cur, out)
                else:
                    fill(x, buf, cur, out[:take])
                acc ^= np.bitwise_xor.reduce(out[:take])
                done += take
            return acc

        return run

    return SimpleNamespace(
        lanes=L,
        regenerate=regenerate,
        refill=refill,
        next_block16=next_block16,
        next_block_state=next_block_state,
        fill_single=fill_single,
        fill_block16=fill_block16,
        fill_block_state=fill_block_state,
        checksum_single=_checksum(fill_single, 1 << 16),
        checksum_block16=_checksum(fill_block16, 1 << 16),
        checksum_block_state=_checksum(fill_block_state, NL),
    )


@functools.lru_cache(maxsize=None)
def scalar_kernels() -> SimpleNamespace:
    """Plain one-word-at-a-time MT19937 query loop, no tempered buffer.

    ``cur`` is int64[1]: words of ``x`` already consumed.
    """
    regenerate = numba_kernels(1).regenerate

    @numba.njit(nogil=True)
    def fill(x, cur, out):
        i = cur[0]
        for j in range(out.shape[0]):
            if i == _N:
                regenerate(x)
                i = 0
            out[j] = _temper(x[i])
            i += 1
        cur[0] = i

    @numba.njit(nogil=True)
    def checksum(x, cur, count):
        i = cur[0]
        acc = np.uint32(0)
        for _ in range(count):
            if i == _N:
                regenerate(x)
                i = 0
            acc ^= _temper(x[i])
            i += 1
        cur[0] = i
        return acc

    return SimpleNamespace(fill=fill, checksum=checksum)


BACKENDS = {"numba": numba_kernels, "numpy": numpy_kernels}
