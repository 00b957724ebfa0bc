"""Toeplitz transform on finite prefixes.

Positions are 1-based throughout the public API: ``t_n = a_{delta(n)}``.
Internally digits live in uint8 numpy arrays (index ``n - 1``).
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .errors import ArgumentError, CapacityError, PreconditionError
from .index_arithmetic import PrimeSet, count_L, delta_table, free_positions
from .rng import uniform_digits

DEFAULT_BUDGET = 1 << 20
BUDGET_ENV = "NORMALITY_LAB_BUDGET"


def enumeration_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError as exc:
        raise ArgumentError(f"{BUDGET_ENV}={raw!r} is not an integer") from exc
    if value < 1:
        raise ArgumentError(f"{BUDGET_ENV} must be positive")
    return value


class DigitSeq:
    """A finite base-``b`` digit string ``a_1 a_2 ... a_N``."""

    __slots__ = ("base", "digits")

    def __init__(self, base: int, digits: Iterable[int] | np.ndarray):
        if not 2 <= base <= 255:
            raise ArgumentError(f"base must be in [2, 255], got {base}")
        arr = np.asarray(digits)
        if arr.ndim != 1:
            raise ArgumentError("digits must be one-dimensional")
        if arr.size and (arr.min() < 0 or arr.max() >= base):
            raise ArgumentError(f"digit out of range for base {base}")
        self.base = int(base)
        self.digits = arr.astype(np.uint8, copy=False)

    @classmethod
    def from_string(cls, base: int, text: str) -> "DigitSeq":
        """``"0110"`` style literal; only for bases up to 10."""
        return cls(base, [int(c) for c in text])

    def __len__(self) -> int:
        return int(self.digits.size)

    def at(self, n: int) -> int:
        """The 1-based digit ``a_n``."""
        return int(self.digits[n - 1])

    def prefix(self, n: int) -> "DigitSeq":
        return DigitSeq(self.base, self.digits[:n])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DigitSeq):
            return NotImplemented
        return self.base == other.base and np.array_equal(self.digits, other.digits)

    def __hash__(self):
        return hash((self.base, self.digits.tobytes()))

    def __repr__(self) -> str:
        head = "".join(map(str, self.digits[:24].tolist())) if self.base <= 10 else "..."
        tail = "..." if len(self) > 24 else ""
        return f"DigitSeq(base={self.base}, len={len(self)}, {head}{tail})"


@dataclass(frozen=True)
class SampleSpec:
    primes: PrimeSet
    base: int
    length: int
    seed: int

    def __post_init__(self):
        if self.length < 1:
            raise ArgumentError("sample length must be >= 1")
        if not 2 <= self.base <= 255:
            raise ArgumentError(f"base must be in [2, 255], got {self.base}")


def toeplitz_transform(P: PrimeSet, a: DigitSeq, N: int) -> DigitSeq:
    if N < 0:
        raise ArgumentError("N must be non-negative")
    if N == 0:
        return DigitSeq(a.base, np.zeros(0, dtype=np.uint8))
    idx = delta_table(P, N)
    need = int(idx.max())
    if need > len(a):
        first = int(np.argmax(idx > len(a))) + 1
        raise PreconditionError(
            f"input too short: t_{first} needs free digit a_{len(a) + 1} "
            f"(have {len(a)}, need {need})"
        )
    return DigitSeq(a.base, a.digits[idx - 1])


def extract_free(P: PrimeSet, t: DigitSeq) -> DigitSeq:
    pos = free_positions(P, len(t))
    return DigitSeq(t.base, t.digits[pos - 1])


def is_toeplitz(P: PrimeSet, t: DigitSeq) -> list[tuple[int, int]]:
    """Every ``(n, i)`` (``i`` 1-based into P) with ``t_n != t_{n p_i}``."""
    found = []
    for i, p in enumerate(P.primes, start=1):
        m = len(t) // p
        if m == 0:
            continue
        n = np.arange(1, m + 1)
        bad = n[t.digits[:m] != t.digits[n * p - 1]]
        found.extend((int(k), i) for k in bad)
    found.sort()
    return found


def sample_mu(spec: SampleSpec) -> DigitSeq:
    """Draw a prefix of length ``spec.length`` from the pushforward measure."""
    free = count_L(spec.primes, spec.length)
    a = DigitSeq(spec.base, uniform_digits(spec.seed, spec.base, free))
    return toeplitz_transform(spec.primes, a, spec.length)


def enumerate_TP(
    P: PrimeSet, base: int, length: int, budget: int | None = None
) -> Iterator[DigitSeq]:
    """All length-``length`` Toeplitz prefixes, lexicographic in free digits."""
    if budget is None:
        budget = enumeration_budget()
    free = count_L(P, length)
    if base**free > budget:
        raise CapacityError(
            f"enumeration of {base}^{free} prefixes exceeds budget {budget}"
        )
    idx = delta_table(P, length) - 1 if length else np.zeros(0, dtype=np.int64)
    for combo in itertools.product(range(base), repeat=free):
        a = np.fromiter(combo, dtype=np.uint8, count=free)
        yield DigitSeq(base, a[idx])


class ExactValue(NamedTuple):
    """``numerator / denominator`` with ``denominator = b**len``, unreduced."""

    numerator: int
    denominator: int

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)


def _pack_words(digits: np.ndarray, base: int) -> tuple[list[int], int]:
    """Group digits into int64 words of ``c`` digits each (front-padded)."""
    c = max(1, int(62 // np.log2(base)))
    pad = (-digits.size) % c
    arr = np.concatenate([np.zeros(pad, dtype=np.int64), digits.astype(np.int64)])
    arr = arr.reshape(-1, c)
    weights = base ** np.arange(c - 1, -1, -1, dtype=np.int64)
    return (arr @ weights).tolist(), c


def _combine(words: list[int], radix: int) -> int:
    # divide and conquer keeps big-int multiplications balanced
    if len(words) <= 32:
        acc = 0
        for w in words:
            acc = acc * radix + w
        return acc
    half = len(words) // 2
    lo = words[half:]
    return _combine(words[:half], radix) * radix ** len(lo) + _combine(lo, radix)


def value_of(v: DigitSeq) -> ExactValue:
    n = len(v)
    if n == 0:
        return ExactValue(0, 1)
    words, c = _pack_words(v.digits, v.base)
    return ExactValue(_combine(words, v.base**c), v.base**n)
