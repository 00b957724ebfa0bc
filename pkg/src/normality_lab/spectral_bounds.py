"""Exponential sums over Toeplitz prefixes (P = {2}).

Floating point only ever sees reduced phases: huge products such as
``r^n * L`` are reduced modulo the relevant power of ``b`` in exact integer
arithmetic first.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import ArgumentError, CapacityError
from .index_arithmetic import PrimeSet
from .rng import derive_seed
from .toeplitz_core import SampleSpec, enumerate_TP, enumeration_budget, sample_mu, value_of

P2 = PrimeSet((2,))


def _factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def multiplicatively_dependent(r: int, b: int) -> bool:
    """True iff ``r^s == b^t`` for some positive integers ``s, t``."""
    if r < 2 or b < 2:
        raise ArgumentError("need r, b >= 2")
    fr, fb = _factor(r), _factor(b)
    if fr.keys() != fb.keys():
        return False
    ratios = {Fraction(fr[p], fb[p]) for p in fr}
    return len(ratios) == 1


def m_q(b: int, ell: int, q: int) -> Fraction:
    """``sum_{k=0}^{floor(log2(ell/q))} b^(-q 2^k)``, exactly."""
    if not 1 <= q <= ell:
        raise ArgumentError(f"need 1 <= q <= ell, got q={q}, ell={ell}")
    top = (ell // q).bit_length() - 1
    return sum((Fraction(1, b ** (q << k)) for k in range(top + 1)), Fraction(0))


# -- Riesz products ------------------------------------------------------------


@dataclass(frozen=True)
class RieszQuery:
    b: int
    r: int
    L: int
    J: int
    N: int
    tail_tol: float = 1e-3
    max_factors: int = 1 << 16

    def __post_init__(self):
        if self.b < 2 or self.r < 2:
            raise ArgumentError("need b, r >= 2")
        if multiplicatively_dependent(self.r, self.b):
            raise ArgumentError(f"r={self.r} is a rational power of b={self.b}")
        if self.L < 1 or self.N < 1 or self.J < 0:
            raise ArgumentError("need L >= 1, N >= 1, J >= 0")
        if not 0 < self.tail_tol < 1:
            raise ArgumentError("tail_tol must lie in (0, 1)")


@dataclass(frozen=True)
class RieszResult:
    value: float
    lower: float
    products: np.ndarray
    factors_used: int

    def to_json(self) -> dict:
        return {"value": self.value, "lower": self.lower, "factors_used": self.factors_used}


def _digits_lsb(x: int, b: int) -> np.ndarray:
    """Base-``b`` digits of ``x``, least significant first."""
    if b & (b - 1) == 0:
        bits = b.bit_length() - 1
        raw = np.frombuffer(x.to_bytes(max(1, (x.bit_length() + 7) // 8), "little"), dtype=np.uint8)
        flat = np.unpackbits(raw, bitorder="little")
        pad = (-flat.size) % bits
        flat = np.concatenate([flat, np.zeros(pad, dtype=np.uint8)]).reshape(-1, bits)
        return (flat.astype(np.int64) << np.arange(bits)).sum(axis=1)
    chunk = max(1, int(62 // math.log2(b)))
    radix = b**chunk
    words = []
    while x:
        x, rem = divmod(x, radix)
        words.append(rem)
    if not words:
        return np.zeros(1, dtype=np.int64)
    w = np.array(words, dtype=np.int64)
    pows = b ** np.arange(chunk, dtype=np.int64)
    return ((w[:, None] // pows) % b).reshape(-1)


def _tail_factor(b: int, tol: float) -> float:
    # neglected phases y_i < (tol/pi) b^(-2i); factor >= 1 - (b-1)/(2b) (pi y_i)^2
    c = (b - 1) / (2 * b) * tol * tol
    out = 1.0
    for i in range(64):
        out *= 1.0 - c * float(b) ** (-4 * i)
    return out


def _riesz_term(R: int, q: RieszQuery, weights: np.ndarray) -> tuple[float, int]:
    b = q.b
    # q_stop: least q with pi * R * b^-q < tol, decided in logs (R overflows floats)
    excess = math.log(R, b) + math.log(math.pi / q.tail_tol, b)
    q_stop = max(0, math.floor(excess) + 1)
    q_first = q.J + 1 if (q.J + 1) % 2 else q.J + 2
    q_cut = q_stop if q_stop % 2 else q_stop + 1
    qs = np.arange(q_first, q_cut, 2)
    if qs.size > q.max_factors:
        raise CapacityError(f"{qs.size} active factors exceed max_factors={q.max_factors}")
    if qs.size == 0:
        return 1.0, 0
    W = weights.size
    digits = _digits_lsb(R, b)
    padded = np.zeros(W + max(digits.size, int(qs[-1])) + 1, dtype=np.int64)
    padded[W : W + digits.size] = digits
    # windows[q] holds digits q-W .. q-1 of R, i.e. frac(R / b^q)
    windows = np.lib.stride_tricks.sliding_window_view(padded, W)
    phases = windows[qs].astype(np.float64) @ weights
    factors = 1.0 / b + (b - 1) / b * np.abs(np.cos(np.pi * phases))
    return float(np.prod(factors)), int(qs.size)


def riesz_product_sum(q: RieszQuery) -> RieszResult:
    """``sum_{n<N} prod_{q' odd, q' > J} (1/b + (b-1)/b |cos(pi r^n L b^-q')|)``.

    Each product is truncated before the first odd ``q'`` where
    ``pi r^n L b^-q' < tail_tol``; every dropped factor lies in ``[lower, 1]``
    so the true sum lies in ``[lower, value]``.
    """
    digits_per_phase = int(math.ceil(60 / math.log2(q.b)))
    # window read most-significant-first: fraction 0.d_{q-1} d_{q-2} ...
    weights = float(q.b) ** -np.arange(digits_per_phase, 0, -1, dtype=np.float64)
    products = np.empty(q.N)
    used = 0
    R = q.L
    for n in range(q.N):
        products[n], k = _riesz_term(R, q, weights)
        used += k
        R *= q.r
    value = math.fsum(products.tolist())
    return RieszResult(value, value * _tail_factor(q.b, q.tail_tol), products, used)


# -- L2(mu) integral ------------------------------------------------------------


def min_truncation(b: int, r: int, h: int, m: int, k: int) -> int:
    """Smallest even ``ell`` with ``b^ell > r^(m+k+1) h``."""
    target = r ** (m + k + 1) * h
    ell = 0
    while b**ell <= target:
        ell += 2
    return ell


@dataclass(frozen=True)
class L2Query:
    b: int
    r: int
    h: int
    m: int
    k: int
    ell: int | None = None
    mode: str = "exact"
    samples: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.b < 2 or self.r < 2 or self.h < 1 or self.k < 1 or self.m < 0:
            raise ArgumentError("need b, r >= 2, h >= 1, k >= 1, m >= 0")
        if multiplicatively_dependent(self.r, self.b):
            raise ArgumentError(f"r={self.r} is a rational power of b={self.b}")
        # m >= k + 1 + 2 log_r b  <=>  r^(m-k-1) >= b^2
        if self.m - self.k - 1 < 0 or self.r ** (self.m - self.k - 1) < self.b**2:
            raise ArgumentError(f"violates m >= k + 1 + 2 log_r b (m={self.m}, k={self.k})")
        least = min_truncation(self.b, self.r, self.h, self.m, self.k)
        if self.ell is None:
            object.__setattr__(self, "ell", least)
        if self.ell % 2 or self.ell < least:
            raise ArgumentError(f"ell must be even and >= {least}, got {self.ell}")
        if self.mode not in ("exact", "montecarlo"):
            raise ArgumentError(f"unknown mode {self.mode!r}")
        if self.mode == "montecarlo" and self.samples < 2:
            raise ArgumentError("montecarlo needs >= 2 samples")


@dataclass(frozen=True)
class L2Result:
    value: float
    stderr: float | None
    mode: str
    count: int
    ell: int

    def to_json(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "mode": self.mode, "count": self.count, "ell": self.ell}


def _sum_sq(numerators: Sequence[int], q: L2Query) -> np.ndarray:
    """``|sum_{j=m+1}^{m+k} e(r^j h V / b^ell)|^2`` for each numerator ``V``."""
    B = q.b**q.ell
    acc = np.zeros(len(numerators), dtype=np.complex128)
    for j in range(q.m + 1, q.m + q.k + 1):
        coef = pow(q.r, j, B) * q.h % B
        y = np.array([(coef * V % B) / B for V in numerators])
        acc += np.exp(2j * np.pi * y)
    return np.abs(acc) ** 2


def l2_exponential_sum_mu(q: L2Query) -> L2Result:
    """``int |sum_{j=m+1}^{m+k} e(r^j h x)|^2 dmu`` on ``ell``-digit truncations."""
    if q.mode == "exact":
        budget = enumeration_budget()
        if q.b ** (q.ell // 2) > budget:
            raise CapacityError(f"exact mode needs {q.b}^{q.ell // 2} prefixes, budget {budget}")
        nums = [value_of(v).numerator for v in enumerate_TP(P2, q.b, q.ell, budget=budget)]
        vals = _sum_sq(nums, q)
        return L2Result(math.fsum(vals.tolist()) / len(nums), None, "exact", len(nums), q.ell)
    nums = [
        value_of(sample_mu(SampleSpec(P2, q.b, q.ell, derive_seed(q.seed, i)))).numerator
        for i in range(q.samples)
    ]
    vals = _sum_sq(nums, q)
    mean = math.fsum(vals.tolist()) / len(vals)
    stderr = float(np.std(vals, ddof=1)) / math.sqrt(len(vals))
    return L2Result(mean, stderr, "montecarlo", len(vals), q.ell)


# -- fits and sweeps ------------------------------------------------------------


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    residual_norm: float

    def to_json(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "residual_norm": self.residual_norm}


def exponent_fit(pairs: Iterable[tuple[float, float]]) -> ExponentFit:
    """Least-squares line through ``(log scale, log value)``."""
    pts = list(pairs)
    if len(pts) < 3:
        raise ArgumentError("need at least 3 (scale, value) pairs")
    if any(s <= 0 or v <= 0 for s, v in pts):
        raise ArgumentError("scales and values must be positive")
    x = np.log([s for s, _ in pts])
    y = np.log([v for _, v in pts])
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.linalg.norm(A @ np.array([slope, intercept]) - y))
    return ExponentFit(float(slope), float(intercept), resid)


def sweep_csv(rows: Iterable[tuple[float, float, float | None]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scale", "value", "stderr"])
    for scale, value, err in rows:
        writer.writerow([scale, repr(float(value)), "" if err is None else repr(float(err))])
    return buf.getvalue()
