"""The interleaved generator: ``lanes`` de-phased MT19937 streams polled round robin.

Output ``i * lanes + t`` is the ``i``-th value of lane ``t``, and lane ``t``
is the scalar MT19937 stream started ``t * 2**q`` values in. With one lane
the output is plain MT19937.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _lanes
from .gf2 import F2Matrix
from .jump import JumpSpec, find_jump_matrix, jump_matrix, make_dephased_states, production_exponent
from .mt import MT19937, Mt19937State, seed_state

__all__ = ["LANE_COUNTS", "QUERY_MODES", "VmtConfig", "VMT19937", "ScalarMT19937", "vmt_new"]

LANE_COUNTS = (1, 2, 4, 8, 16)
QUERY_MODES = ("single", "block16", "state")
BUFFER_WORDS = _lanes.BUFFER_WORDS

# exponents at or below this are computed on the fly when no matrix is supplied
_AUTO_JUMP_LIMIT = 20


@dataclass(frozen=True)
class VmtConfig:
    lanes: int = 1
    query: str = "single"
    exponent: Optional[int] = None

    def __post_init__(self):
        if self.lanes not in LANE_COUNTS:
            raise ValueError(f"lanes must be one of {LANE_COUNTS}, got {self.lanes}")
        if self.query not in QUERY_MODES:
            raise ValueError(f"query must be one of {QUERY_MODES}, got {self.query!r}")
        if self.exponent is not None and self.exponent < 0:
            raise ValueError("exponent must be non-negative")

    @property
    def jump_exponent(self) -> int:
        return production_exponent(self.lanes) if self.exponent is None else self.exponent

    @property
    def register_bits(self) -> int:
        return 32 * self.lanes

    @property
    def state_words(self) -> int:
        return MT19937.n * self.lanes


class VMT19937:
    """Vectorised Mersenne Twister over ``config.lanes`` interleaved states.

    Parameters
    ----------
    seed : int
        32-bit seed for the single base state all lanes derive from.
    config : VmtConfig
        Lane count, preferred query mode and jump exponent ``q``.
    jump : F2Matrix, optional
        ``F ** (2 ** q)``. If omitted it is looked up in ``$VMT_JUMP_DIR``,
        or computed when ``q`` is small. Unused with one lane.
    backend : {"numba", "numpy"}
        Compiled lane kernels or the portable numpy fallback. Streams are
        bit-identical.
    """

    def __init__(
        self,
        seed: int = 5489,
        config: VmtConfig | None = None,
        jump: F2Matrix | None = None,
        *,
        backend: str = "numba",
    ):
        config = config or VmtConfig()
        if backend not in _lanes.BACKENDS:
            raise ValueError(f"unknown backend {backend!r}")
        self.config = config
        self.seed = seed & 0xFFFFFFFF
        self.backend = backend
        self._k = _lanes.BACKENDS[backend](config.lanes)
        self.interleaved, self.buffer, self._cur = _lanes.new_state_arrays(config.lanes)

        lanes = config.lanes
        if jump is not None and jump.dim != MT19937.effective_dim:
            raise ValueError(f"jump matrix must be {MT19937.effective_dim}-dimensional, got {jump.dim}")
        if lanes > 1 and jump is None:
            jump = _resolve_jump(config.jump_exponent)
        base = seed_state(self.seed)
        if lanes == 1:
            states = [base]
        else:
            states = make_dephased_states(base, JumpSpec(config.jump_exponent, lanes), jump)
        self.interleaved.reshape(MT19937.n, lanes)[:] = np.stack([s.words for s in states], axis=1)

    # -- state inspection -------------------------------------------------

    @property
    def lanes(self) -> int:
        return self.config.lanes

    @property
    def state_words(self) -> int:
        return self.config.state_words

    @property
    def buffer_cursor(self) -> int:
        return int(self._cur[0])

    @property
    def state_cursor(self) -> int:
        return int(self._cur[1])

    def lane_state(self, t: int) -> Mt19937State:
        """Copy of lane ``t`` as a scalar state (cursor reflects tempered words)."""
        words = self.interleaved.reshape(MT19937.n, self.lanes)[:, t].copy()
        tempered_groups = -(-self.state_cursor // self.lanes)
        return Mt19937State(words, min(tempered_groups, MT19937.n))

    # -- queries ----------------------------------------------------------

    def regenerate(self):
        """Advance every lane by ``n`` steps at once (discarding unread words)."""
        self._k.regenerate(self.interleaved)
        self._cur[0] = BUFFER_WORDS
        self._cur[1] = 0

    def next_u32(self) -> int:
        cur = self._cur
        if cur[0] == BUFFER_WORDS:
            self._k.refill(self.interleaved, self.buffer, cur)
        v = self.buffer[cur[0]]
        cur[0] += 1
        return int(v)

    def next_block16(self, out: np.ndarray | None = None) -> np.ndarray:
        """The next 16 values; same as 16 calls to :meth:`next_u32`."""
        if out is None:
            out = np.empty(BUFFER_WORDS, dtype=np.uint32)
        elif out.shape != (BUFFER_WORDS,) or out.dtype != np.uint32 or not out.flags.c_contiguous:
            raise ValueError("out must be a contiguous uint32 array of 16 words")
        self._k.next_block16(self.interleaved, self.buffer, self._cur, out, 0)
        return out

    def next_block_state(self, out: np.ndarray | None = None) -> np.ndarray:
        """The next ``n * lanes`` values, tempered straight from a fresh regeneration.

        Only valid on a state-block boundary: mixing with single or 16-word
        queries part way through a block is rejected.
        """
        if not self._at_state_boundary():
            raise RuntimeError(
                "state-block query in the middle of a block "
                f"(buffer cursor {self.buffer_cursor}, state cursor {self.state_cursor})"
            )
        if out is None:
            out = np.empty(self.state_words, dtype=np.uint32)
        elif out.shape != (self.state_words,) or out.dtype != np.uint32 or not out.flags.c_contiguous:
            raise ValueError(f"out must be a contiguous uint32 array of {self.state_words} words")
        self._k.next_block_state(self.interleaved, self.buffer, self._cur, out, 0)
        return out

    def _at_state_boundary(self) -> bool:
        return self._cur[0] == BUFFER_WORDS and self._cur[1] == self.state_words

    def generate(self, count: int, mode: str | None = None) -> np.ndarray:
        """``count`` values drawn with the given query mode (default: the config's)."""
        mode = mode or self.config.query
        out = np.empty(count, dtype=np.uint32)
        if mode == "single":
            self._k.fill_single(self.interleaved, self.buffer, self._cur, out)
        elif mode == "block16":
            self._k.fill_block16(self.interleaved, self.buffer, self._cur, out)
        elif mode == "state":
            if count % self.state_words:
                raise ValueError(f"state-block generation needs a multiple of {self.state_words} words")
            if not self._at_state_boundary():
                raise RuntimeError("state-block query in the middle of a block")
            self._k.fill_block_state(self.interleaved, self.buffer, self._cur, out)
        else:
            raise ValueError(f"unknown query mode {mode!r}")
        return out

    def checksum(self, count: int, mode: str | None = None) -> int:
        """XOR of the next ``count`` values, generated without materialising them.

        In ``state`` mode a trailing partial block is generated in full and
        only its first values are folded in.
        """
        mode = mode or self.config.query
        if mode == "state" and not self._at_state_boundary():
            raise RuntimeError("state-block query in the middle of a block")
        try:
            fn = getattr(self._k, f"checksum_{_MODE_SUFFIX[mode]}")
        except KeyError:
            raise ValueError(f"unknown query mode {mode!r}") from None
        return int(fn(self.interleaved, self.buffer, self._cur, count))

    def __iter__(self):
        while True:
            yield self.next_u32()

    def __repr__(self):
        return f"VMT19937(seed={self.seed}, lanes={self.lanes}, q={self.config.jump_exponent}, backend={self.backend!r})"


_MODE_SUFFIX = {"single": "single", "block16": "block16", "state": "block_state"}


def _resolve_jump(exponent: int) -> F2Matrix:
    found = find_jump_matrix(exponent)
    if found is not None:
        return found
    if exponent <= _AUTO_JUMP_LIMIT:
        return jump_matrix(exponent)
    raise FileNotFoundError(
        f"no precomputed jump matrix for q={exponent}; run `vmt19937 jump -q {exponent}` "
        "and point $VMT_JUMP_DIR at the output directory, or pass the matrix explicitly"
    )


class ScalarMT19937:
    """Compiled scalar MT19937 that tempers one word per query.

    Same stream as :func:`vmt19937.mt.next_u32`; used as the benchmark
    baseline.
    """

    def __init__(self, seed: int = 5489):
        state = seed_state(seed)
        self.words = state.words.copy()
        self._cur = np.array([state.cursor], dtype=np.int64)
        self._k = _lanes.scalar_kernels()

    def generate(self, count: int) -> np.ndarray:
        out = np.empty(count, dtype=np.uint32)
        self._k.fill(self.words, self._cur, out)
        return out

    def checksum(self, count: int) -> int:
        return int(self._k.checksum(self.words, self._cur, count))


def vmt_new(seed: int, config: VmtConfig, B: F2Matrix | None = None, **kwargs) -> VMT19937:
    return VMT19937(seed, config, B, **kwargs)
