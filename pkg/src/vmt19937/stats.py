"""Small statistical smoke tests for 32-bit word streams.

These are a quick sanity battery, not a substitute for TestU01 or PractRand.
A stream is either a uint32 array or a callable ``draw(count) -> array``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence, Union

import numpy as np
from scipy.special import gammaincc

__all__ = [
    "ALPHA",
    "StatReport",
    "monobit",
    "chi2_bytes",
    "chi2_pvalue",
    "lane_cross_correlation",
    "TESTS",
]

#: two-sided significance level
ALPHA = 1e-3
MIN_MONOBIT_WORDS = 10**6
MIN_PER_BIN = 50

WordSource = Union[np.ndarray, Callable[[int], np.ndarray]]


@dataclass(frozen=True)
class StatReport:
    name: str
    samples: int
    statistic: float
    p_value: float
    passed: bool

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value {self.p_value} outside [0, 1]")

    def __str__(self):
        verdict = "PASS" if self.passed else "FAIL"
        return f"{self.name:<24} n={self.samples:<10d} stat={self.statistic:<12.6g} p={self.p_value:<10.4g} {verdict}"


def _draw(stream: WordSource, count: int) -> np.ndarray:
    words = stream(count) if callable(stream) else np.asarray(stream)[:count]
    words = np.asarray(words)
    if words.shape != (count,):
        raise ValueError(f"stream produced {words.shape} words, wanted {count}")
    return words.astype(np.uint32, copy=False)


def _popcount(words: np.ndarray) -> int:
    return int(np.unpackbits(words.view(np.uint8)).sum(dtype=np.int64))


def monobit(stream: WordSource, count: int) -> StatReport:
    """Balance of ones and zeros over ``32 * count`` bits.

    The p-value is two-sided under N(0, 1); the test passes when it is at
    least ``ALPHA``.
    """
    if count < MIN_MONOBIT_WORDS:
        raise ValueError(f"monobit needs at least {MIN_MONOBIT_WORDS} words, got {count}")
    words = _draw(stream, count)
    nbits = 32 * count
    z = (2 * _popcount(words) - nbits) / math.sqrt(nbits)
    p = math.erfc(abs(z) / math.sqrt(2))
    return StatReport("monobit", count, z, p, p >= ALPHA)


def chi2_pvalue(statistic: float, dof: int) -> float:
    """Upper-tail chi-square probability via the regularized upper gamma."""
    return float(gammaincc(dof / 2.0, statistic / 2.0))


def chi2_bytes(stream: WordSource, count: int) -> StatReport:
    """Chi-square goodness of fit of the byte histogram (255 degrees of freedom).

    Fails when the upper-tail p-value falls outside ``[ALPHA/2, 1 - ALPHA/2]``,
    so a fit that is too good is rejected as well as one that is too poor.
    """
    if 4 * count < 256 * MIN_PER_BIN:
        raise ValueError(f"chi2_bytes needs at least {256 * MIN_PER_BIN // 4} words, got {count}")
    words = _draw(stream, count)
    counts = np.bincount(words.view(np.uint8), minlength=256).astype(np.float64)
    expected = 4 * count / 256
    stat = float(((counts - expected) ** 2).sum() / expected)
    p = chi2_pvalue(stat, 255)
    return StatReport("chi2_bytes", count, stat, p, ALPHA / 2 <= p <= 1 - ALPHA / 2)


def lane_cross_correlation(streams: Sequence[WordSource], count: int) -> StatReport:
    """Largest pairwise Pearson correlation between lanes (as uniforms in [0, 1)).

    Passes when ``max |rho| < 4 / sqrt(count)``. The reported p-value is the
    Bonferroni-corrected two-sided normal tail of the worst pair.
    """
    if len(streams) < 2:
        raise ValueError("lane_cross_correlation needs at least two streams")
    u = np.stack([_draw(s, count) for s in streams]).astype(np.float64) / 2.0**32
    with np.errstate(invalid="ignore", divide="ignore"):
        rho = np.corrcoef(u)
    # a constant lane has undefined correlation; treat it as fully dependent
    rho = np.nan_to_num(rho, nan=1.0)
    pairs = list(combinations(range(len(streams)), 2))
    worst = max(abs(float(rho[i, j])) for i, j in pairs)
    p = min(1.0, len(pairs) * math.erfc(worst * math.sqrt(count) / math.sqrt(2)))
    return StatReport("lane_cross_correlation", count, worst, p, worst < 4 / math.sqrt(count))


TESTS = {
    "monobit": monobit,
    "chi2": chi2_bytes,
    "xcorr": lane_cross_correlation,
}
