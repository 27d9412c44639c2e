"""VMT19937: a SIMD-friendly generator built from interleaved, jump-ahead
de-phased MT19937 streams."""

from .engine import LANE_COUNTS, QUERY_MODES, VMT19937, ScalarMT19937, VmtConfig, vmt_new
from .gf2 import F2Matrix, F2Vector, build_F, mat_mul, mat_pow2, vec_mat_mul
from .jump import JumpSpec, jump_matrix, jump_state, make_dephased_states, production_exponent
from .mt import MT19937, Mt19937Params, Mt19937State, next_u32, seed_state, temper

__version__ = "0.1.0"

__all__ = [
    "LANE_COUNTS",
    "QUERY_MODES",
    "VMT19937",
    "ScalarMT19937",
    "VmtConfig",
    "vmt_new",
    "F2Matrix",
    "F2Vector",
    "build_F",
    "mat_mul",
    "mat_pow2",
    "vec_mat_mul",
    "JumpSpec",
    "jump_matrix",
    "jump_state",
    "make_dephased_states",
    "production_exponent",
    "MT19937",
    "Mt19937Params",
    "Mt19937State",
    "next_u32",
    "seed_state",
    "temper",
]
