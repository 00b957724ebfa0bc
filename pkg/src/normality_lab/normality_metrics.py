"""Finite-N normality statistics.

``max_dev`` is the largest ``|count/N - b^-k|`` over *all* ``b^k`` words,
including words that never occur.  Aligned blocks are base-``b^k`` digits
(simple normality to ``b^k``); sliding counts are a diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, PreconditionError
from .toeplitz_core import DigitSeq, value_of


@dataclass(frozen=True)
class FreqReport:
    base: int
    block_len: int
    mode: str
    n: int
    counts: dict[str, int]
    max_dev: float

    def to_json(self) -> dict:
        return {
            "base": self.base,
            "block_len": self.block_len,
            "mode": self.mode,
            "n": self.n,
            "counts": dict(self.counts),
            "max_dev": self.max_dev,
        }


def word_key(word, base: int) -> str:
    """Bases up to 10 concatenate digits (``"011"``); larger ones use commas."""
    digits = [int(d) for d in word]
    if base <= 10:
        return "".join(map(str, digits))
    return ",".join(map(str, digits))


def _block_codes(blocks: np.ndarray, base: int) -> np.ndarray:
    k = blocks.shape[1]
    weights = base ** np.arange(k - 1, -1, -1, dtype=np.int64)
    return blocks.astype(np.int64) @ weights


def _tally(blocks: np.ndarray, base: int, mode: str) -> FreqReport:
    count_n, k = blocks.shape
    if k * math.log2(base) <= 62:
        codes, counts = np.unique(_block_codes(blocks, base), return_counts=True)
        words = [
            [(int(c) // base**(k - 1 - i)) % base for i in range(k)] for c in codes.tolist()
        ]
    else:
        uniq, counts = np.unique(blocks, axis=0, return_counts=True)
        words = uniq.tolist()
    expected = float(base) ** -k
    table = {word_key(w, base): int(c) for w, c in zip(words, counts.tolist())}
    dev = max((abs(c / count_n - expected) for c in table.values()), default=0.0)
    if len(table) < base**k:
        dev = max(dev, expected)
    return FreqReport(base, k, mode, count_n, table, dev)


def aligned_block_freq(x: DigitSeq, k: int) -> FreqReport:
    if k < 1:
        raise ArgumentError("block length must be >= 1")
    if len(x) < k:
        raise PreconditionError(f"sequence of length {len(x)} shorter than k={k}")
    m = len(x) // k
    return _tally(x.digits[: m * k].reshape(m, k), x.base, "aligned")


def sliding_block_freq(x: DigitSeq, k: int) -> FreqReport:
    if k < 1:
        raise ArgumentError("block length must be >= 1")
    if len(x) < k:
        raise PreconditionError(f"sequence of length {len(x)} shorter than k={k}")
    windows = np.lib.stride_tricks.sliding_window_view(x.digits, k)
    return _tally(windows, x.base, "sliding")


def normality_score(x: DigitSeq, kmax: int) -> list[tuple[int, float]]:
    """``(k, aligned max_dev)`` for ``k = 1 .. kmax``."""
    if len(x) < kmax:
        raise PreconditionError(f"sequence of length {len(x)} shorter than kmax={kmax}")
    return [(k, aligned_block_freq(x, k).max_dev) for k in range(1, kmax + 1)]


@dataclass(frozen=True)
class WeylReport:
    r: int
    h: int
    n: int
    precision: int
    value: float

    def to_json(self) -> dict:
        return {"r": self.r, "h": self.h, "n": self.n, "precision": self.precision, "value": self.value}


def required_precision(base: int, r: int, h: int, N: int) -> int:
    """Least digit count ``L`` with ``base^L >= r^N * h * 2^64``."""
    target = r**N * h << 64
    L = max(0, int((N * math.log(r) + math.log(h) + 64 * math.log(2)) / math.log(base)) - 2)
    while base**L < target:
        L += 1
    while L > 0 and base ** (L - 1) >= target:
        L -= 1
    return L


def weyl_sum(x: DigitSeq, r: int, h: int, N: int) -> WeylReport:
    """``|sum_{n=1..N} e(r^n h x)| / N`` with phases reduced exactly mod ``b^len``."""
    if r < 2 or h < 1 or N < 1:
        raise ArgumentError("need r >= 2, h >= 1, N >= 1")
    need = required_precision(x.base, r, h, N)
    if len(x) < need:
        raise PreconditionError(
            f"precision guard: N={N}, r={r}, h={h} in base {x.base} "
            f"requires at least {need} digits, got {len(x)}"
        )
    V, B = value_of(x)
    phase = h * V % B
    cos_terms = []
    sin_terms = []
    for _ in range(N):
        phase = phase * r % B
        angle = 2.0 * math.pi * (phase / B)
        cos_terms.append(math.cos(angle))
        sin_terms.append(math.sin(angle))
    re, im = math.fsum(cos_terms), math.fsum(sin_terms)
    return WeylReport(r, h, N, len(x), math.hypot(re, im) / N)
