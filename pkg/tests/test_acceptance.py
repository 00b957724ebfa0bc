"""Acceptance gate: one PASS/FAIL line per criterion (see the terminal summary)."""

import time
from fractions import Fraction

import numpy as np
import pytest

from normality_lab.characterization import (
    CondIIQuery,
    condII_estimate,
    double_transform_witness,
    lemma5_check,
    lemma5_required_len,
    removal_set,
    sigma_perm,
)
from normality_lab.index_arithmetic import PrimeSet, count_L, decompose, delta, gap_scan, unrank_L
from normality_lab.independence_lab import (
    CounterexampleParams,
    counterexample_digits,
    delta_keymap,
    dyadic_block_report,
    sqrt_window,
    window_certify,
)
from normality_lab.normality_metrics import aligned_block_freq, weyl_sum
from normality_lab.rng import derive_seed, uniform_digits
from normality_lab.spectral_bounds import (
    L2Query,
    RieszQuery,
    exponent_fit,
    l2_exponential_sum_mu,
    m_q,
    riesz_product_sum,
)
from normality_lab.toeplitz_core import (
    DigitSeq,
    SampleSpec,
    enumerate_TP,
    extract_free,
    is_toeplitz,
    sample_mu,
    toeplitz_transform,
)

from oracles import l2_double_sum

pytestmark = pytest.mark.slow


def test_c01_decomposition_oracle(criterion):
    N = 10**5
    mismatches = 0
    elapsed = 0.0
    for primes in [(2,), (2, 3), (3, 5)]:
        P = PrimeSet(primes)
        # oracle: trial division by each p, then a linear scan ranking the free parts
        exps, lparts = [], []
        for n in range(1, N + 1):
            e, l = [], n
            for p in primes:
                c = 0
                while l % p == 0:
                    l //= p
                    c += 1
                e.append(c)
            exps.append(tuple(e))
            lparts.append(l)
        rank, frees = {}, []
        for m in range(1, N + 1):
            if all(m % p for p in primes):
                frees.append(m)
                rank[m] = len(frees)

        t0 = time.perf_counter()
        got = [decompose(P, n) for n in range(1, N + 1)]
        deltas = [delta(P, n) for n in range(1, N + 1)]
        unranked = [unrank_L(P, k) for k in range(1, len(frees) + 1)]
        elapsed += time.perf_counter() - t0

        for n, d in enumerate(got, start=1):
            mismatches += (d.exponents, d.l_part, d.rank) != (exps[n - 1], lparts[n - 1], rank[lparts[n - 1]])
            mismatches += deltas[n - 1] != rank[lparts[n - 1]]
        mismatches += sum(u != f for u, f in zip(unranked, frees))
    ok = mismatches == 0 and elapsed < 10
    criterion("C1 decomposition oracle", ok, f"mismatches={mismatches} runtime={elapsed:.2f}s (<10s)")
    assert ok


def test_c02_toeplitz_identities(criterion):
    bad = 0
    N = 10**4
    sets = [PrimeSet(p) for p in [(2,), (2, 3), (3, 5)]]
    for seed in range(100):
        P = sets[seed % 3]
        base = 2 + seed % 9
        a = DigitSeq(base, uniform_digits(seed, base, N))
        t = toeplitz_transform(P, a, N)
        bad += bool(is_toeplitz(P, t))
        bad += extract_free(P, t) != a.prefix(count_L(P, N))
    P2 = PrimeSet((2,))
    members = list(enumerate_TP(P2, 2, 20))
    distinct = len({m.digits.tobytes() for m in members})
    clean = all(not is_toeplitz(P2, m) for m in members)
    ok = bad == 0 and len(members) == 1024 and distinct == 1024 and clean
    criterion("C2 Toeplitz identities", ok, f"seed failures={bad} TP(20) members={len(members)} distinct={distinct}")
    assert ok


def test_c03_gap_property(criterion):
    P = PrimeSet((2, 3))
    rep = gap_scan(P, 10**6, floor=100)
    cert = window_certify(delta_keymap(P), 10**6, sqrt_window, start=100)
    ok = rep.min_ratio > 2 and cert.passed
    criterion(
        "C3 gap property n >= 100",
        ok,
        f"min ratio={rep.min_ratio:.4f} at {rep.argmin}; certify first violation n={cert.first_violation} "
        f"collision={cert.collision}; empirical n0={rep.empirical_n0} worst pair={rep.worst_violation}",
    )
    assert ok


def test_c04_mu_samples_block_frequencies(criterion):
    t0 = time.perf_counter()
    P, N, thresh = PrimeSet((2, 3)), 10**5, 0.02

    def worst(x):
        return max(aligned_block_freq(x, k).max_dev for k in (1, 2, 3))

    # baseline: i.i.d. digits at the same N must clear the same threshold
    baseline = sum(worst(DigitSeq(2, uniform_digits(derive_seed(999, s), 2, N))) < thresh for s in range(50))
    passing = sum(worst(sample_mu(SampleSpec(P, 2, N, s))) < thresh for s in range(50))
    elapsed = time.perf_counter() - t0
    ok = baseline >= 48 and passing >= 48 and elapsed < 60
    criterion("C4 mu-sample aligned max_dev", ok, f"mu {passing}/50, iid baseline {baseline}/50, runtime {elapsed:.1f}s")
    assert ok


def test_c05_counterexample(criterion):
    t0 = time.perf_counter()
    structure_ok = True
    drifting = 0
    N = 2**21 - 1
    for seed in range(100):
        params = CounterexampleParams(2, 1, seed)
        rep = dyadic_block_report(counterexample_digits(params, N), 0, params, j_max=20)
        rows = {r.j: r for r in rep.rows}
        structure_ok &= all(rows[j].structure_ok for j in range(2, 21))
        structure_ok &= (rows[4].pattern_len, rows[4].repeats) == (4, 4)
        structure_ok &= (rows[16].pattern_len, rows[16].repeats) == (8, 2**16 // 8)
        drifting += rep.max_deviation(4, 20) >= 1 / 8
    elapsed = time.perf_counter() - t0
    ok = structure_ok and drifting >= 95 and elapsed < 60
    criterion("C5 counterexample structure and drift", ok, f"structure={structure_ok} drift seeds={drifting}/100 runtime {elapsed:.1f}s")
    assert ok


def test_c06_lemma5(criterion):
    failures = 0
    for p1, p2, k in [(2, 3, 0), (2, 3, 1), (2, 3, 2), (3, 5, 0), (3, 5, 1)]:
        rs = removal_set(p1, p2, k)
        sigma = sigma_perm(rs)
        need = lemma5_required_len(rs, 100)
        for trial in range(100):
            x = DigitSeq(2, uniform_digits(derive_seed(p1 * 100 + p2 * 10 + k, trial), 2, need))
            failures += sum(not lemma5_check(x, rs, i, sigma) for i in range(1, 101))
    criterion("C6 block rearrangement identity", failures == 0, f"failed windows={failures} of 50000")
    assert failures == 0


def test_c07_condition_ii(criterion):
    N = 10**6
    q = CondIIQuery(1, [[[0], [1]], [[1], [0]]])
    x = DigitSeq(2, uniform_digits(77, 2, 12 * N + 8))
    res = condII_estimate(x, q, 2, 3, N)
    z = abs(res.frequency - 1 / 16) / res.stderr

    # closure: a shortened family's hits equal the sum over its extensions
    short = CondIIQuery(1, [[[0], [1]], [[1], []]])
    ext_total = sum(condII_estimate(x, CondIIQuery(1, [[[0], [1]], [[1], [d]]]), 2, 3, N).hits for d in (0, 1))
    closure = condII_estimate(x, short, 2, 3, N).hits == ext_total

    # offsets: shifting every word keeps the estimate on target
    shift_z = []
    for amount in (-3, 5):
        r = condII_estimate(x, q.shifted(amount), 2, 3, N)
        shift_z.append(abs(r.frequency - 1 / 16) / r.stderr)
    ok = z < 4 and closure and max(shift_z) < 4
    criterion(
        "C7 condition (II) echo",
        ok,
        f"freq={res.frequency:.5f} z={z:.2f}; closure exact={closure}; shifted z={[round(v, 2) for v in shift_z]}",
    )
    assert ok


def test_c08_double_transform(criterion):
    P, N = PrimeSet((2,)), 10**4
    counts = []
    for seed in range(100):
        base = 2 + seed % 7
        a = DigitSeq(base, uniform_digits(seed, base, 4 * N))
        counts.append(double_transform_witness(toeplitz_transform(P, a, 4 * N), N))
    ok = not any(counts)
    criterion("C8 double-transform witness", ok, f"nonzero counts={sum(c > 0 for c in counts)}/100")
    assert ok


def test_c09_weyl(criterion):
    t0 = time.perf_counter()
    values = [weyl_sum(sample_mu(SampleSpec(PrimeSet((2,)), 2, 4000, s)), 3, 1, 2000).value for s in range(100)]
    elapsed = time.perf_counter() - t0
    good = sum(v <= 0.1 for v in values)
    ok = good >= 90 and elapsed < 120
    criterion("C9 Weyl sum echo", ok, f"{good}/100 <= 0.1 (max {max(values):.4f}) runtime {elapsed:.1f}s")
    assert ok


def test_c10_spectral(criterion):
    ratios = [
        l2_exponential_sum_mu(L2Query(2, 3, 1, m=m, k=k, ell=ell)).value / k**2
        for k, m, ell in [(4, 7, 20), (8, 11, 32)]
    ]
    decreasing = ratios[1] < ratios[0]
    oracle_err = max(
        abs(l2_exponential_sum_mu(L2Query(2, 3, 1, m=m, k=k, ell=ell)).value / l2_double_sum(2, 3, 1, m, k, ell) - 1)
        for k, m, ell in [(2, 5, 14), (2, 5, 16), (3, 6, 16)]
    )
    sweep = [(N, riesz_product_sum(RieszQuery(2, 3, 2**10, 10, N)).value) for N in (2**8, 2**10, 2**12)]
    slope = exponent_fit(sweep).slope
    ok = decreasing and oracle_err <= 1e-12 and slope < 1
    criterion(
        "C10 L2 integral and Riesz sweep",
        ok,
        f"value/k^2={[round(r, 5) for r in ratios]} oracle rel err={oracle_err:.1e} riesz slope={slope:.3g}",
    )
    assert ok


def test_c11_m_q_pivot(criterion):
    checked = failures = 0
    for b in range(2, 37):
        for ell in range(1, 65):
            for q in range(1, ell + 1):
                if ell < 2 * q:
                    checked += 1
                    failures += m_q(b, ell, q) != Fraction(1, b**q)
    criterion("C11 M_q pivot", failures == 0, f"{checked} (b, ell, q) triples, failures={failures}")
    assert failures == 0
