"""Block-frequency characterization of normal Toeplitz transforms, P = {p1, p2}.

Cut ``tau_P(x)`` into words ``w_i`` of length ``(p1 p2)^(k+1)``.  Deleting
the positions divisible by ``p1^(k+1)`` or ``p2^(k+1)`` and applying one fixed
permutation turns every ``w_i`` into the concatenation of ``(k+1)^2`` blocks
of ``x``; block ``(i1, i2)`` has length ``c * p1^i1 * p2^i2`` with
``c = (p1-1)(p2-1)`` and is the ``i``-th block of that length in ``x``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ArgumentError, PreconditionError
from .index_arithmetic import PrimeSet, delta_array, is_prime
from .toeplitz_core import DigitSeq, is_toeplitz, toeplitz_transform


def _valuation(n: int, p: int) -> int:
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


@dataclass(frozen=True)
class RemovalSet:
    p1: int
    p2: int
    k: int
    I_size: int
    J: tuple[int, ...]

    @property
    def kept_len(self) -> int:
        return self.I_size - len(self.J)

    @property
    def kept(self) -> tuple[int, ...]:
        removed = set(self.J)
        return tuple(j for j in range(1, self.I_size + 1) if j not in removed)


def removal_set(p1: int, p2: int, k: int) -> RemovalSet:
    if p1 == p2 or not (is_prime(p1) and is_prime(p2)):
        raise ArgumentError(f"need two distinct primes, got {p1}, {p2}")
    if k < 0:
        raise ArgumentError(f"k must be >= 0, got {k}")
    q1, q2 = p1 ** (k + 1), p2 ** (k + 1)
    size = (p1 * p2) ** (k + 1)
    J = tuple(j for j in range(1, size + 1) if j % q1 == 0 or j % q2 == 0)
    if len(J) != q1 + q2 - 1 or size - len(J) != (q1 - 1) * (q2 - 1):
        raise AssertionError(f"removal set identities fail for ({p1}, {p2}, {k})")
    return RemovalSet(p1, p2, k, size, J)


def rho_J(rs: RemovalSet, w: Sequence[int] | np.ndarray) -> np.ndarray:
    arr = np.asarray(w)
    if arr.shape != (rs.I_size,):
        raise ArgumentError(f"word must have length {rs.I_size}, got {arr.shape}")
    keep = np.ones(rs.I_size, dtype=bool)
    keep[np.asarray(rs.J) - 1] = False
    return arr[keep]


@dataclass(frozen=True)
class SigmaPerm:
    """1-based permutation; ``apply(a)[t] = a[perm[t] - 1]``."""

    perm: tuple[int, ...]

    def apply(self, word: Sequence[int] | np.ndarray) -> np.ndarray:
        arr = np.asarray(word)
        if arr.shape != (len(self.perm),):
            raise ArgumentError(f"word must have length {len(self.perm)}")
        return arr[np.asarray(self.perm) - 1]

    def is_bijection(self) -> bool:
        return sorted(self.perm) == list(range(1, len(self.perm) + 1))


def block_order(p1: int, p2: int, k: int) -> list[tuple[int, int, int]]:
    """``(i1, i2, length)`` of the target blocks in concatenation order."""
    c = (p1 - 1) * (p2 - 1)
    return [(i1, i2, c * p1**i1 * p2**i2) for i1 in range(k + 1) for i2 in range(k + 1)]


def sigma_perm(rs: RemovalSet) -> SigmaPerm:
    """Kept position ``j = p1^a p2^b m`` feeds block ``(k-a, k-b)`` in increasing ``m``."""
    groups: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for src, j in enumerate(rs.kept, start=1):
        a, b = _valuation(j, rs.p1), _valuation(j, rs.p2)
        m = j // (rs.p1**a * rs.p2**b)
        groups.setdefault((rs.k - a, rs.k - b), []).append((m, src))
    perm: list[int] = []
    for i1, i2, length in block_order(rs.p1, rs.p2, rs.k):
        members = sorted(groups.get((i1, i2), []))
        if len(members) != length:
            raise AssertionError(f"block ({i1},{i2}) expects {length} symbols, got {len(members)}")
        perm.extend(src for _, src in members)
    return SigmaPerm(tuple(perm))


def lemma5_required_len(rs: RemovalSet, i: int) -> int:
    """Length of ``x`` needed to hold every block referenced by window ``i``."""
    c = (rs.p1 - 1) * (rs.p2 - 1)
    return c * (rs.p1 * rs.p2) ** rs.k * i


def lemma5_check(
    x: DigitSeq, rs: RemovalSet, i: int, sigma: SigmaPerm | None = None
) -> bool:
    """Does ``sigma(rho_J(w_i))`` equal the concatenated blocks of ``x``?"""
    if i < 1:
        raise ArgumentError("window index i must be >= 1")
    need = lemma5_required_len(rs, i)
    if len(x) < need:
        raise ArgumentError(f"window {i} needs {need} digits of x, have {len(x)}")
    if sigma is None:
        sigma = sigma_perm(rs)
    P = PrimeSet((rs.p1, rs.p2))
    positions = np.arange(rs.I_size * (i - 1) + 1, rs.I_size * i + 1, dtype=np.int64)
    w = x.digits[delta_array(P, positions) - 1]
    lhs = sigma.apply(rho_J(rs, w))
    rhs = np.concatenate(
        [x.digits[length * (i - 1) : length * i] for _, _, length in block_order(rs.p1, rs.p2, rs.k)]
    )
    return bool(np.array_equal(lhs, rhs))


# -- condition (II) ------------------------------------------------------------


@dataclass(frozen=True)
class CondIIQuery:
    """Words ``u[i1][i2]`` and offsets ``delta[i1][i2]`` for ``0 <= i1, i2 <= k``."""

    k: int
    words: tuple[tuple[tuple[int, ...], ...], ...]
    offsets: tuple[tuple[int, ...], ...]

    def __init__(self, k: int, words, offsets=None):
        if k < 0:
            raise ArgumentError("k must be >= 0")
        side = k + 1
        if not words:
            raise ArgumentError("empty word family")
        w = tuple(tuple(tuple(int(d) for d in u) for u in row) for row in words)
        if len(w) != side or any(len(row) != side for row in w):
            raise ArgumentError(f"word family must be {side}x{side}")
        if offsets is None:
            offsets = [[0] * side for _ in range(side)]
        o = tuple(tuple(int(d) for d in row) for row in offsets)
        if len(o) != side or any(len(row) != side for row in o):
            raise ArgumentError(f"offsets must be {side}x{side}")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "words", w)
        object.__setattr__(self, "offsets", o)

    @classmethod
    def from_json(cls, payload: dict | str) -> "CondIIQuery":
        try:
            data = json.loads(payload) if isinstance(payload, str) else payload
            return cls(data["k"], data["words"], data.get("offsets"))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ArgumentError(f"malformed condition-II query: {exc}") from exc

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "words": [[list(u) for u in row] for row in self.words],
            "offsets": [list(row) for row in self.offsets],
        }

    def total_len(self) -> int:
        return sum(len(u) for row in self.words for u in row)

    def shifted(self, amount: int) -> "CondIIQuery":
        offs = [[d + amount for d in row] for row in self.offsets]
        return CondIIQuery(self.k, self.words, offs)


@dataclass(frozen=True)
class CondIIResult:
    hits: int
    n_effective: int
    frequency: float
    target: float
    stderr: float

    def to_json(self) -> dict:
        return {
            "n_effective": self.n_effective,
            "frequency": self.frequency,
            "target": self.target,
            "stderr": self.stderr,
        }


def condII_estimate(x: DigitSeq, q: CondIIQuery, p1: int, p2: int, N: int) -> CondIIResult:
    """Fraction of ``n <= N`` where each ``u[i1][i2]`` starts at
    ``(p1-1)(p2-1) p1^i1 p2^i2 n + delta[i1][i2]`` (1-based).

    Indices whose position falls below 1 are dropped from the denominator.
    """
    if N < 1:
        raise ArgumentError("N must be >= 1")
    c = (p1 - 1) * (p2 - 1)
    n = np.arange(1, N + 1, dtype=np.int64)
    valid = np.ones(N, dtype=bool)
    hit = np.ones(N, dtype=bool)
    for i1, i2 in itertools.product(range(q.k + 1), repeat=2):
        word = q.words[i1][i2]
        step = c * p1**i1 * p2**i2
        offset = q.offsets[i1][i2]
        last = step * N + offset + len(word) - 1
        if last > len(x):
            raise PreconditionError(
                f"x has {len(x)} digits; word ({i1},{i2}) at n={N} reaches position {last}"
            )
        pos = step * n + offset
        ok = pos >= 1
        valid &= ok
        start = np.where(ok, pos, 1) - 1
        for t, d in enumerate(word):
            hit &= x.digits[start + t] == d
    hit &= valid
    n_eff = int(np.count_nonzero(valid))
    hits = int(np.count_nonzero(hit))
    target = float(x.base) ** -q.total_len()
    freq = hits / n_eff if n_eff else float("nan")
    stderr = math.sqrt(target * (1 - target) / n_eff) if n_eff else float("nan")
    return CondIIResult(hits, n_eff, freq, target, stderr)


# -- double transform ------------------------------------------------------------

_P2 = PrimeSet((2,))


def double_transform_witness(t: DigitSeq, N: int) -> int:
    """Count ``n <= N`` with ``d_{4n-2} != d_{4n-1}`` where ``d = tau_{2}(t)``.

    Zero for every Toeplitz input; a nonzero count cannot happen.
    """
    if N < 1:
        raise ArgumentError("N must be >= 1")
    violations = is_toeplitz(_P2, t)
    if violations:
        n, _ = violations[0]
        raise PreconditionError(f"input is not Toeplitz for P={{2}}: t_{n} != t_{2 * n}")
    d = toeplitz_transform(_P2, t, 4 * N - 1).digits
    n = np.arange(1, N + 1)
    return int(np.count_nonzero(d[4 * n - 3] != d[4 * n - 2]))
