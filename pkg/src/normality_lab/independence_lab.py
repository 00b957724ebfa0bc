"""Independence windows and the log-log counterexample process.

The counterexample assigns digit ``X_n = Z[j, m]`` with ``j = floor(log2 n)``,
``m = n mod 2Kr`` and ``r`` the largest power of two with ``2^(2^r) <= n``.
Since ``2^(2^r) <= n`` iff ``2^r <= j``, ``r`` depends on ``j`` only: it is
the largest power of two not exceeding ``floor(log2 j)``.
``X_1 X_2 X_3 = 000``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import ArgumentError, PreconditionError
from .index_arithmetic import PrimeSet, delta_array
from .rng import derive_seed, uniform_digits
from .toeplitz_core import DigitSeq

KeyMap = Callable[[np.ndarray], np.ndarray]
WindowFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CounterexampleParams:
    base: int
    K: int
    seed: int

    def __post_init__(self):
        if not 2 <= self.base <= 255:
            raise ArgumentError(f"base must be in [2, 255], got {self.base}")
        if self.K < 1 or self.K & (self.K - 1):
            raise ArgumentError(f"K must be a positive power of two, got {self.K}")

    def pattern_len(self, j: int) -> int:
        return 2 * self.K * r_of_j(j)


class IndexKey(NamedTuple):
    j: int
    m: int
    r: int


def r_of_j(j: int) -> int:
    if j < 2:
        raise ArgumentError(f"r is only defined for n >= 4 (j >= 2), got j={j}")
    log_j = j.bit_length() - 1
    return 1 << (log_j.bit_length() - 1)


def index_key(n: int, K: int) -> IndexKey:
    if n < 4:
        raise ArgumentError(f"key is only defined for n >= 4, got {n}")
    j = n.bit_length() - 1
    r = r_of_j(j)
    return IndexKey(j, n % (2 * K * r), r)


def _pattern(params: CounterexampleParams, j: int) -> np.ndarray:
    """``Z[j, 0 .. 2Kr-1]``; one PCG64 stream per ``j`` keeps draws query-independent."""
    return uniform_digits(derive_seed(params.seed, j), params.base, params.pattern_len(j))


def counterexample_digits(params: CounterexampleParams, N: int) -> DigitSeq:
    if N < 1:
        raise ArgumentError("N must be >= 1")
    out = np.zeros(N, dtype=np.uint8)
    j = 2
    while (1 << j) <= N:
        lo, hi = 1 << j, min(N, (1 << (j + 1)) - 1)
        n = np.arange(lo, hi + 1, dtype=np.int64)
        z = _pattern(params, j)
        out[lo - 1 : hi] = z[n % z.size]
        j += 1
    return DigitSeq(params.base, out)


def _floor_log2(v: np.ndarray) -> np.ndarray:
    # exact for 1 <= v < 2^53
    return np.frexp(v.astype(np.float64))[1].astype(np.int64) - 1


def _j_and_r(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = np.asarray(n, dtype=np.int64)
    if n.size and n.min() < 4:
        raise ArgumentError("key is only defined for n >= 4")
    j = _floor_log2(n)
    return j, np.left_shift(1, _floor_log2(_floor_log2(j)))


def counterexample_keymap(K: int) -> KeyMap:
    """Vectorised ``n -> key(n)`` packed as ``j * 2^32 + m`` (needs n >= 4)."""

    def keymap(n: np.ndarray) -> np.ndarray:
        j, r = _j_and_r(n)
        return (j << 32) + np.asarray(n, dtype=np.int64) % (2 * K * r)

    return keymap


def counterexample_window(K: int) -> WindowFn:
    """``2K r(n) - 1``, the independence window the construction guarantees."""

    def window(n: np.ndarray) -> np.ndarray:
        _, r = _j_and_r(n)
        return 2 * K * r - 1

    return window


def delta_keymap(P: PrimeSet) -> KeyMap:
    return lambda n: delta_array(P, np.asarray(n, dtype=np.int64))


def sqrt_window(n: np.ndarray) -> np.ndarray:
    """``floor(2 sqrt(n))`` computed exactly."""
    n = np.asarray(n, dtype=np.int64)
    w = np.floor(2.0 * np.sqrt(n.astype(np.float64))).astype(np.int64)
    w -= w * w > 4 * n
    w += (w + 1) * (w + 1) <= 4 * n
    return w


@dataclass(frozen=True)
class CertifyResult:
    passed: bool
    start: int
    N: int
    first_violation: int | None
    collision: tuple[int, int] | None

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "start": self.start,
            "N": self.N,
            "first_violation": self.first_violation,
            "collision": list(self.collision) if self.collision else None,
        }


def window_certify(
    keymap: KeyMap, N: int, window: WindowFn, start: int = 1
) -> CertifyResult:
    """Check that ``key(n), ..., key(n + window(n))`` are pairwise distinct.

    Uses next-occurrence links: the window at ``n`` is clean iff every index
    ``i`` in it has its next same-key index beyond ``n + window(n)``.  Range
    minima come from a sparse table sized to the largest window.
    """
    if N < start:
        raise ArgumentError(f"empty range: start={start} > N={N}")
    idx = np.arange(start, N + 1, dtype=np.int64)
    w = np.asarray(window(idx), dtype=np.int64)
    if w.size and w.min() < 0:
        raise ArgumentError("window lengths must be non-negative")
    end = idx + w
    top = int(end.max())
    span = np.arange(start, top + 1, dtype=np.int64)
    keys = np.asarray(keymap(span))

    # nxt[i]: next position with the same key (or sentinel beyond top)
    order = np.lexsort((span, keys))
    sk = keys[order]
    nxt = np.full(span.size, top + 1, dtype=np.int64)
    same = sk[1:] == sk[:-1]
    nxt[order[:-1][same]] = span[order[1:][same]]

    levels = [nxt]
    while (1 << len(levels)) <= int(w.max()) + 1:
        prev = levels[-1]
        half = 1 << (len(levels) - 1)
        levels.append(np.minimum(prev[:-half], prev[half:]))

    lo = idx - start
    length = w + 1
    lvl = np.floor(np.log2(length)).astype(np.int64)
    best = np.empty(idx.size, dtype=np.int64)
    for L in np.unique(lvl).tolist():
        sel = lvl == L
        a = lo[sel]
        b = lo[sel] + length[sel] - (1 << L)
        best[sel] = np.minimum(levels[L][a], levels[L][b])
    bad = best <= end
    if not bad.any():
        return CertifyResult(True, start, N, None, None)
    pos = int(np.argmax(bad))
    n = int(idx[pos])
    seg = span[n - start : int(end[pos]) - start + 1]
    seg_next = nxt[n - start : int(end[pos]) - start + 1]
    hit = int(np.argmax(seg_next <= end[pos]))
    return CertifyResult(False, start, N, n, (int(seg[hit]), int(seg_next[hit])))


@dataclass(frozen=True)
class DyadicRow:
    j: int
    digit: int
    deviation: float
    pattern_len: int | None
    repeats: int | None
    structure_ok: bool | None

    def to_json(self) -> dict:
        return {
            "j": self.j,
            "digit": self.digit,
            "deviation": self.deviation,
            "pattern_len": self.pattern_len,
            "repeats": self.repeats,
            "structure_ok": self.structure_ok,
        }


@dataclass(frozen=True)
class DyadicReport:
    base: int
    rows: list[DyadicRow]

    def to_json(self) -> list[dict]:
        return [row.to_json() for row in self.rows]

    def max_deviation(self, j_lo: int, j_hi: int) -> float:
        return max(r.deviation for r in self.rows if j_lo <= r.j <= j_hi)


def dyadic_block_report(
    x: DigitSeq,
    u: int,
    params: CounterexampleParams | None = None,
    j_max: int | None = None,
) -> DyadicReport:
    """Digit-``u`` frequency deviation on each block ``[2^j, 2^(j+1))``.

    With ``params`` each block (``j >= 2``) is also checked to be its first
    ``2Kr`` digits repeated ``2^j / 2Kr`` times.
    """
    if not 0 <= u < x.base:
        raise ArgumentError(f"digit {u} outside base {x.base}")
    full = (len(x) + 1).bit_length() - 2  # largest j with 2^(j+1) - 1 <= len
    if j_max is None:
        j_max = full
    elif j_max > full:
        raise PreconditionError(
            f"block j={j_max} needs {2 ** (j_max + 1) - 1} digits, have {len(x)}"
        )
    rows = []
    for j in range(0, j_max + 1):
        block = x.digits[(1 << j) - 1 : (1 << (j + 1)) - 1]
        dev = abs(float(np.count_nonzero(block == u)) / block.size - 1.0 / x.base)
        plen = reps = ok = None
        if params is not None and j >= 2:
            plen = params.pattern_len(j)
            if block.size % plen == 0:
                reps = block.size // plen
                ok = bool(np.array_equal(block, np.tile(block[:plen], reps)))
            else:
                ok = bool(np.array_equal(block[plen:], block[:-plen]))
        rows.append(DyadicRow(j, u, dev, plen, reps, ok))
    return DyadicReport(x.base, rows)
