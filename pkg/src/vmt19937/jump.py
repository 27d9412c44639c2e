"""Jump-ahead: move a generator ``2**q`` steps forward with one GF(2) product."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .gf2 import F2Matrix, build_F, mat_pow2, vec_mat_mul
from .matrix_file import read_jump_matrix
from .mt import MT19937, Mt19937State, effective_to_state, state_to_effective

__all__ = [
    "JUMP_DIR_ENV",
    "JumpSpec",
    "production_exponent",
    "jump_matrix",
    "jump_matrix_filename",
    "find_jump_matrix",
    "jump_state",
    "make_dephased_states",
]

JUMP_DIR_ENV = "VMT_JUMP_DIR"


def _log2_lanes(lanes: int) -> int:
    if lanes < 1 or lanes & (lanes - 1):
        raise ValueError(f"lane count must be a power of two, got {lanes}")
    return lanes.bit_length() - 1


def production_exponent(lanes: int) -> int:
    """Jump exponent that splits the full period evenly: ``19937 - log2(lanes)``."""
    return MT19937.effective_dim - _log2_lanes(lanes)


@dataclass(frozen=True)
class JumpSpec:
    """``lanes`` copies of a state, lane ``t`` moved ``t * 2**exponent`` steps."""

    exponent: int
    lanes: int = 1

    def __post_init__(self):
        if self.exponent < 0:
            raise ValueError(f"exponent must be >= 0, got {self.exponent}")
        _log2_lanes(self.lanes)

    @classmethod
    def production(cls, lanes: int) -> JumpSpec:
        return cls(production_exponent(lanes), lanes)

    @property
    def length(self) -> int:
        return 1 << self.exponent


def jump_matrix(exponent: int, **kwargs) -> F2Matrix:
    """Compute ``F ** (2 ** exponent)`` from scratch.

    Cheap for small exponents; the production exponents take hours, so those
    should come from a file written by ``vmt19937 jump``.
    """
    return mat_pow2(build_F(), exponent, **kwargs)


def jump_matrix_filename(exponent: int) -> str:
    return f"jump_q{exponent}.vmtj"


def find_jump_matrix(exponent: int, directory: Optional[os.PathLike] = None) -> Optional[F2Matrix]:
    """Look for a precomputed matrix in ``directory`` or ``$VMT_JUMP_DIR``."""
    directory = directory or os.environ.get(JUMP_DIR_ENV)
    if not directory:
        return None
    path = Path(directory) / jump_matrix_filename(exponent)
    if not path.exists():
        return None
    return read_jump_matrix(path, dim=MT19937.effective_dim, exponent=exponent).matrix


def jump_state(state: Mt19937State, B: F2Matrix) -> Mt19937State:
    """Advance ``state`` by the number of steps ``B`` encodes.

    The state must sit on a fully consumed block (as returned by
    :func:`~vmt19937.mt.seed_state`). The result does too, so its output
    stream is the input's stream with the jumped-over values skipped.
    """
    if B.dim != state.params.effective_dim:
        raise ValueError(f"jump matrix is {B.dim}-dimensional, state has {state.params.effective_dim} live bits")
    return effective_to_state(vec_mat_mul(state_to_effective(state), B), state.params)


def make_dephased_states(X0: Mt19937State, spec: JumpSpec, B: F2Matrix) -> list[Mt19937State]:
    """``[X0, X0*B, X0*B**2, ...]``, one state per lane (``lanes - 1`` products)."""
    states = [X0.copy()]
    for _ in range(spec.lanes - 1):
        states.append(jump_state(states[-1], B))
    return states
