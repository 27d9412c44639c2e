import math

import mpmath
import numpy as np
import pytest

from vmt19937 import stats
from vmt19937.engine import VMT19937, VmtConfig


def cycle_words(count):
    """Every byte value equally often: bytes 0..255 repeating."""
    return np.arange(4 * count, dtype=np.uint64).astype(np.uint8).view(np.uint32)


# -- monobit ------------------------------------------------------------------


def test_monobit_all_zero_fails():
    r = stats.monobit(np.zeros(10**6, np.uint32), 10**6)
    assert r.p_value < 1e-100 and not r.passed


def test_monobit_alternating_balance_passes_at_p_one():
    words = np.tile(np.array([0x55555555, 0xAAAAAAAA], np.uint32), 500_000)
    r = stats.monobit(words, 10**6)
    assert r.statistic == 0.0 and r.p_value == 1.0 and r.passed


def test_monobit_requires_a_million_words():
    with pytest.raises(ValueError):
        stats.monobit(np.zeros(999_999, np.uint32), 999_999)


def test_monobit_accepts_callable_source():
    g = VMT19937(1)
    r = stats.monobit(g.generate, 10**6)
    assert r.samples == 10**6 and 0 <= r.p_value <= 1


# -- chi-square ---------------------------------------------------------------


def test_chi2_uniform_cycle_statistic_zero():
    r = stats.chi2_bytes(cycle_words(64 * 1600), 64 * 1600)
    assert r.statistic == 0.0 and r.p_value == 1.0
    # a fit this perfect is rejected by the two-sided rule
    assert not r.passed


def test_chi2_constant_fails():
    r = stats.chi2_bytes(np.full(10**5, 0x07070707, np.uint32), 10**5)
    assert r.p_value < 1e-100 and not r.passed


def test_chi2_minimum_sample():
    stats.chi2_bytes(cycle_words(3200), 3200)
    with pytest.raises(ValueError):
        stats.chi2_bytes(cycle_words(3199), 3199)


PAIRS = [
    (0.5, 1), (3.84, 1), (10.0, 1), (1.0, 2), (5.99, 2), (20.0, 3), (9.49, 4), (0.1, 5),
    (30.0, 10), (18.3, 10), (100.0, 50), (200.0, 255), (255.0, 255), (293.25, 255), (310.5, 255),
    (180.0, 255), (350.0, 255), (1000.0, 900), (0.001, 255), (260.0, 256),
]


@pytest.mark.parametrize("stat, dof", PAIRS)
def test_chi2_pvalue_against_arbitrary_precision(stat, dof):
    mpmath.mp.dps = 50
    exact = mpmath.gammainc(mpmath.mpf(dof) / 2, mpmath.mpf(stat) / 2, mpmath.inf, regularized=True)
    assert abs(stats.chi2_pvalue(stat, dof) - float(exact)) <= 1e-10


# -- lane correlation ---------------------------------------------------------


def test_xcorr_duplicate_streams_fail():
    s = VMT19937(5).generate(10**5)
    r = stats.lane_cross_correlation([s, s.copy()], 10**5)
    assert r.statistic == pytest.approx(1.0) and not r.passed


def test_xcorr_constant_lane_treated_as_dependent():
    s = VMT19937(5).generate(10**4)
    r = stats.lane_cross_correlation([s, np.zeros(10**4, np.uint32)], 10**4)
    assert not r.passed


def test_xcorr_independent_seeds_pass():
    streams = [VMT19937(seed).generate(10**5) for seed in (1, 2, 3, 4)]
    assert stats.lane_cross_correlation(streams, 10**5).passed


def test_xcorr_dephased_lanes_q10(ladder):
    g = VMT19937(5489, VmtConfig(lanes=4, exponent=10), ladder[10])
    lanes = g.generate(4 * 10**5).reshape(10**5, 4).T
    r = stats.lane_cross_correlation(list(lanes), 10**5)
    assert r.passed and r.statistic < 4 / math.sqrt(10**5)


def test_xcorr_needs_two_streams():
    with pytest.raises(ValueError):
        stats.lane_cross_correlation([np.zeros(10, np.uint32)], 10)


# -- reports ------------------------------------------------------------------


def test_report_rejects_bad_p_value():
    with pytest.raises(ValueError):
        stats.StatReport("x", 1, 0.0, 1.5, True)


def test_report_text():
    text = str(stats.StatReport("monobit", 10, 0.25, 0.8, True))
    assert text.startswith("monobit") and text.endswith("PASS")


def test_short_stream_rejected():
    with pytest.raises(ValueError):
        stats.monobit(np.zeros(10, np.uint32), 10**6)


def test_p_values_are_deterministic():
    words = VMT19937(77).generate(10**6)
    for name in ("monobit", "chi2"):
        a = stats.TESTS[name](words, 10**6)
        b = stats.TESTS[name](words.copy(), 10**6)
        assert a == b
