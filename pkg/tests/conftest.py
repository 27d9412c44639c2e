import numpy as np
import pytest

from vmt19937.gf2 import build_F, mat_pow2
from vmt19937.jump import jump_matrix_filename
from vmt19937.matrix_file import write_jump_matrix

LADDER_EXPONENTS = (0, 4, 6, 8, 10, 11, 16)


@pytest.fixture(scope="session")
def F():
    return build_F()


@pytest.fixture(scope="session")
def ladder(F):
    """``{q: F ** (2 ** q)}`` for the exponents the tests use, from one squaring run."""
    snaps = {0: F}

    def keep(done, matrix):
        if done in LADDER_EXPONENTS:
            snaps[done] = matrix

    mat_pow2(F, max(LADDER_EXPONENTS), keep)
    return snaps


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def stat_jump_dir(ladder, tmp_path_factory):
    """Directory holding F^(2^21) and F^(2^22): enough to keep 4 or 8 lanes of
    10^7 words apart. Continues the ladder from q=16."""
    path = tmp_path_factory.mktemp("jumps")

    def store(done, matrix):
        if done in (21, 22):
            write_jump_matrix(path / jump_matrix_filename(done), matrix, done)

    mat_pow2(ladder[16], 22 - 16, store, start=16)
    return path
