import numpy as np
import pytest

from oracles import numpy_raw, numpy_seeded
from vmt19937.gf2 import F2Matrix
from vmt19937.jump import (
    JumpSpec,
    find_jump_matrix,
    jump_matrix_filename,
    jump_state,
    make_dephased_states,
    production_exponent,
)
from vmt19937.matrix_file import write_jump_matrix
from vmt19937.mt import next_u32, seed_state, state_to_effective


def test_production_exponents():
    assert [production_exponent(m) for m in (1, 2, 4, 8, 16)] == [19937, 19936, 19935, 19934, 19933]
    assert JumpSpec.production(16) == JumpSpec(19933, 16)
    with pytest.raises(ValueError):
        production_exponent(3)


def test_jump_spec_validation():
    assert JumpSpec(10, 4).length == 1024
    with pytest.raises(ValueError):
        JumpSpec(-1)
    with pytest.raises(ValueError):
        JumpSpec(4, 6)


def test_identity_jump_keeps_stream():
    s = seed_state(5489)
    j = jump_state(s, F2Matrix.identity(19937))
    assert numpy_raw(j.words, 1000).tolist() == numpy_seeded(5489, 1000).tolist()


@pytest.mark.parametrize("q", [0, 4, 8, 10, 16])
def test_jump_skips_2_pow_q(ladder, q):
    j = jump_state(seed_state(5489), ladder[q])
    ref = numpy_seeded(5489, 2**q + 1000)
    assert np.array_equal(numpy_raw(j.words, 1000), ref[2**q :])


def test_jumped_state_drives_package_generator(ladder):
    j = jump_state(seed_state(5489), ladder[10])
    assert next_u32(j) == int(numpy_seeded(5489, 1025)[1024])


def test_composition(ladder):
    s = seed_state(99)
    twice = jump_state(jump_state(s, ladder[10]), ladder[10])
    once = jump_state(s, ladder[11])
    assert state_to_effective(twice) == state_to_effective(once)


def test_dephased_lanes_m4_q8(ladder):
    states = make_dephased_states(seed_state(5489), JumpSpec(8, 4), ladder[8])
    ref = numpy_seeded(5489, 1024)
    windows = []
    for t, s in enumerate(states):
        lane = numpy_raw(s.words, 256)
        assert lane[0] == ref[256 * t]
        assert np.array_equal(lane, ref[256 * t : 256 * (t + 1)])
        windows.append(set(range(256 * t, 256 * (t + 1))))
    assert len(set().union(*windows)) == 1024


def test_dephased_single_lane(ladder):
    X0 = seed_state(7)
    (only,) = make_dephased_states(X0, JumpSpec(8, 1), ladder[8])
    assert np.array_equal(only.words, X0.words) and only is not X0


def test_jump_rejects_mid_block_and_wrong_dimension(ladder):
    s = seed_state(1)
    with pytest.raises(ValueError):
        jump_state(s, F2Matrix.identity(100))
    next_u32(s)
    with pytest.raises(ValueError):
        jump_state(s, ladder[4])


def test_find_jump_matrix_via_environment(tmp_path, monkeypatch, ladder):
    monkeypatch.delenv("VMT_JUMP_DIR", raising=False)
    assert find_jump_matrix(4) is None
    write_jump_matrix(tmp_path / jump_matrix_filename(4), ladder[4], 4)
    monkeypatch.setenv("VMT_JUMP_DIR", str(tmp_path))
    assert find_jump_matrix(4) == ladder[4]
    assert find_jump_matrix(6) is None
    assert find_jump_matrix(4, tmp_path) == ladder[4]
