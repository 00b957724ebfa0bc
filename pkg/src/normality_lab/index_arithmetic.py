"""Arithmetic on the index structure induced by a finite set of primes.

Every positive integer factors uniquely as ``n = k * l`` where ``k`` is
P-smooth (all prime factors in P) and ``l`` is coprime to every prime in P.
The free part ``l`` is the ``delta(n)``-th element of the increasing
enumeration of P-free integers; two indices are equivalent when they share
their free part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import ArgumentError, RangeError

INT64_MAX = (1 << 63) - 1
MAX_PRIMES = 8

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for every ``n < 3.3e24``."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _check_int64(value: int, what: str) -> int:
    if value > INT64_MAX:
        raise RangeError(f"{what}={value} exceeds the signed 64-bit range")
    return value


@dataclass(frozen=True)
class PrimeSet:
    """A set of 1 to 8 distinct primes, kept in increasing order."""

    primes: tuple[int, ...]

    def __init__(self, primes: Iterable[int]):
        ps = tuple(sorted(int(p) for p in primes))
        if not 1 <= len(ps) <= MAX_PRIMES:
            raise ArgumentError(f"need 1..{MAX_PRIMES} primes, got {len(ps)}")
        if len(set(ps)) != len(ps):
            raise ArgumentError(f"duplicate primes in {ps}")
        for p in ps:
            if not is_prime(p):
                raise ArgumentError(f"{p} is not prime")
            _check_int64(p, "prime")
        object.__setattr__(self, "primes", ps)

    @classmethod
    def parse(cls, text: str) -> "PrimeSet":
        """Parse ``"2,3"`` or ``"{2, 3}"``."""
        body = text.strip().strip("{}[]")
        try:
            return cls(int(tok) for tok in body.split(",") if tok.strip())
        except ValueError as exc:
            raise ArgumentError(f"cannot parse prime set {text!r}") from exc

    @property
    def r(self) -> int:
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes)

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.primes)) + "}"

    @cached_property
    def ie_terms(self) -> tuple[tuple[int, int], ...]:
        """(sign, product) for every subset of the primes."""
        terms = []
        for size in range(self.r + 1):
            for subset in combinations(self.primes, size):
                terms.append((-1 if size % 2 else 1, math.prod(subset)))
        return tuple(terms)

    @cached_property
    def radical(self) -> int:
        return math.prod(self.primes)

    @cached_property
    def totient_of_radical(self) -> int:
        return math.prod(p - 1 for p in self.primes)


@dataclass(frozen=True)
class Decomposition:
    n: int
    exponents: tuple[int, ...]
    l_part: int
    rank: int

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "exponents": list(self.exponents),
            "l_part": self.l_part,
            "rank": self.rank,
        }


def count_L(P: PrimeSet, x: int) -> int:
    """Number of integers in ``[1, x]`` divisible by no prime of P."""
    if x <= 0:
        return 0
    return sum(sign * (x // prod) for sign, prod in P.ie_terms)


def decompose(P: PrimeSet, n: int) -> Decomposition:
    if n < 1:
        raise ArgumentError(f"n must be positive, got {n}")
    _check_int64(n, "n")
    rest = n
    exps = []
    for p in P.primes:
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        exps.append(e)
    return Decomposition(n, tuple(exps), rest, count_L(P, rest))


def delta(P: PrimeSet, n: int) -> int:
    return decompose(P, n).rank


def unrank_L(P: PrimeSet, k: int) -> int:
    """The k-th P-free integer ``j_k`` (1-based)."""
    if k < 1:
        raise ArgumentError(f"k must be positive, got {k}")
    # |count_L(x) - x*phi/rad| <= 2^(r-1) brackets the answer exactly.
    slack = 1 << P.r
    rad, phi = P.radical, P.totient_of_radical
    lo = max(0, (k - slack) * rad // phi - 1)
    hi = (k + slack) * rad // phi + 1
    # invariant: count_L(lo) < k <= count_L(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if count_L(P, mid) >= k:
            hi = mid
        else:
            lo = mid
    return _check_int64(hi, f"unrank_L({k})")


def equivalent(P: PrimeSet, n: int, n_prime: int) -> bool:
    return decompose(P, n).l_part == decompose(P, n_prime).l_part


def enumerate_K(P: PrimeSet, bound: int) -> list[int]:
    """All P-smooth integers ``<= bound`` in increasing order."""
    if bound < 1:
        raise ArgumentError(f"bound must be positive, got {bound}")
    lattice = [1]
    for p in P.primes:
        layer = []
        for base in lattice:
            v = base
            while v <= bound:
                layer.append(v)
                v *= p
        lattice = layer
    return sorted(lattice)


# -- vectorised forms ------------------------------------------------------


def l_part_array(P: PrimeSet, n: np.ndarray) -> np.ndarray:
    out = np.array(n, dtype=np.int64, copy=True)
    for p in P.primes:
        mask = out % p == 0
        while mask.any():
            out[mask] //= p
            mask = out % p == 0
    return out


def count_L_array(P: PrimeSet, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    top = int(x.max()) if x.size else 0
    total = np.zeros_like(x)
    for sign, prod in P.ie_terms:
        if prod <= top:
            total += sign * (x // prod)
    return total


def delta_array(P: PrimeSet, n: np.ndarray) -> np.ndarray:
    """``delta`` applied elementwise to an int64 array of positive indices."""
    return count_L_array(P, l_part_array(P, n))


def delta_table(P: PrimeSet, N: int) -> np.ndarray:
    """``delta(1), ..., delta(N)`` as an int64 array (index 0 holds n=1)."""
    _check_int64(N, "N")
    return delta_array(P, np.arange(1, N + 1, dtype=np.int64))


def free_positions(P: PrimeSet, N: int) -> np.ndarray:
    """The P-free integers ``j_1 < j_2 < ...`` that are ``<= N``."""
    n = np.arange(1, N + 1, dtype=np.int64)
    mask = np.ones(N, dtype=bool)
    for p in P.primes:
        mask &= n % p != 0
    return n[mask]


# -- gap scan ----------------------------------------------------------------


@dataclass(frozen=True)
class GapReport:
    """Empirical view of the gap between consecutive equivalent indices.

    ``empirical_n0`` is the least ``n0`` such that every consecutive pair
    ``n < n'`` in the scan with ``n > n0`` satisfies ``n' - n > 2 sqrt(n)``;
    it is None when the scan contains no pair at all.  ``min_ratio`` is the
    minimum of ``(n' - n) / sqrt(n)`` over pairs with ``n >= floor``.
    """

    primes: tuple[int, ...]
    scanned_bound: int
    floor: int
    pairs: int
    min_ratio: float | None
    argmin: tuple[int, int] | None
    empirical_n0: int | None
    worst_violation: tuple[int, int] | None = field(default=None)

    def to_json(self) -> dict:
        return {
            "primes": list(self.primes),
            "scanned_bound": self.scanned_bound,
            "floor": self.floor,
            "pairs": self.pairs,
            "min_ratio": self.min_ratio,
            "argmin": list(self.argmin) if self.argmin else None,
            "empirical_n0": self.empirical_n0,
            "empirical_n0_absent": self.empirical_n0 is None,
            "worst_violation": list(self.worst_violation) if self.worst_violation else None,
        }


def _least_free_at_least(P: PrimeSet, x: int) -> int:
    return unrank_L(P, count_L(P, x - 1) + 1)


def _greatest_free_at_most(P: PrimeSet, x: int) -> int:
    c = count_L(P, x)
    return unrank_L(P, c) if c else 0


def gap_scan(P: PrimeSet, N: int, floor: int = 1) -> GapReport:
    """Scan consecutive members of every equivalence class inside ``[1, N]``.

    Consecutive members of the class of ``l`` are ``l*k_i < l*k_{i+1}``
    for consecutive P-smooth ``k_i < k_{i+1}``; their ratio
    ``sqrt(l) * (k_{i+1} - k_i) / sqrt(k_i)`` grows with ``l``, so each pair
    type is settled by its extreme admissible ``l``.
    """
    if N < 4:
        raise ArgumentError(f"gap_scan needs N >= 4, got {N}")
    _check_int64(N, "N")
    K = enumerate_K(P, N)
    pairs = 0
    best: tuple[float, int, int] | None = None
    n0 = None
    worst = None
    for k_lo, k_hi in zip(K, K[1:]):
        l_max = N // k_hi
        if l_max < 1:
            break
        pairs += count_L(P, l_max)
        d = k_hi - k_lo
        # (n' - n)^2 <= 4n  <=>  l * d^2 <= 4 k_lo
        l_bad = _greatest_free_at_most(P, min(l_max, (4 * k_lo) // (d * d)))
        if l_bad and (n0 is None or l_bad * k_lo > n0):
            n0 = l_bad * k_lo
            worst = (l_bad * k_lo, l_bad * k_hi)
        l_first = _least_free_at_least(P, max(1, -(-floor // k_lo)))
        if l_first <= l_max:
            ratio = math.sqrt(l_first) * d / math.sqrt(k_lo)
            if best is None or ratio < best[0]:
                best = (ratio, l_first * k_lo, l_first * k_hi)
    if pairs and n0 is None:
        n0 = 0
    return GapReport(
        primes=P.primes,
        scanned_bound=N,
        floor=floor,
        pairs=pairs,
        min_ratio=best[0] if best else None,
        argmin=(best[1], best[2]) if best else None,
        empirical_n0=n0,
        worst_violation=worst,
    )


def consecutive_pairs(P: PrimeSet, N: int) -> Sequence[tuple[int, int]]:
    """All consecutive equivalent pairs ``n < n' <= N`` (materialised)."""
    K = enumerate_K(P, N)
    out = []
    for k_lo, k_hi in zip(K, K[1:]):
        for l in free_positions(P, N // k_hi).tolist():
            out.append((l * k_lo, l * k_hi))
    out.sort()
    return out
