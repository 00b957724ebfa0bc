import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normality_lab.errors import ArgumentError, PreconditionError
from normality_lab.index_arithmetic import PrimeSet
from normality_lab.normality_metrics import (
    aligned_block_freq,
    normality_score,
    required_precision,
    sliding_block_freq,
    weyl_sum,
    word_key,
)
from normality_lab.rng import uniform_digits
from normality_lab.toeplitz_core import DigitSeq, SampleSpec, sample_mu

from oracles import block_counts, weyl_oracle

digit_seqs = st.integers(2, 5).flatmap(
    lambda b: st.lists(st.integers(0, b - 1), min_size=1, max_size=300).map(lambda d: DigitSeq(b, d))
)


def test_aligned_examples():
    z = aligned_block_freq(DigitSeq(2, [0] * 10), 1)
    assert z.counts == {"0": 10} and z.max_dev == 0.5
    alt = aligned_block_freq(DigitSeq(2, [0, 1] * 6), 2)
    assert alt.counts == {"01": 6} and alt.max_dev == 0.75
    assert alt.to_json() == {
        "base": 2, "block_len": 2, "mode": "aligned", "n": 6, "counts": {"01": 6}, "max_dev": 0.75,
    }


def test_sliding_examples():
    assert sliding_block_freq(DigitSeq(2, [0, 0, 0]), 2).counts == {"00": 2}
    assert sliding_block_freq(DigitSeq(2, [0, 1, 1, 0]), 2).counts == {"01": 1, "11": 1, "10": 1}


def test_block_length_errors():
    x = DigitSeq(2, [0, 1])
    for fn in (aligned_block_freq, sliding_block_freq):
        with pytest.raises(ArgumentError):
            fn(x, 0)
        with pytest.raises(PreconditionError):
            fn(x, 3)


def test_word_key_large_base():
    assert word_key([12, 0, 3], 16) == "12,0,3"
    assert word_key([1, 0], 2) == "10"


@settings(max_examples=150)
@given(digit_seqs, st.integers(1, 4))
def test_counts_match_oracle(x, k):
    if len(x) < k:
        return
    for aligned, fn in ((True, aligned_block_freq), (False, sliding_block_freq)):
        rep = fn(x, k)
        brute = block_counts(x.digits.tolist(), k, aligned)
        assert rep.counts == {word_key(w, x.base): c for w, c in brute.items()}
        assert sum(rep.counts.values()) == rep.n
        expected = x.base**-k
        devs = [abs(brute.get(w, 0) / rep.n - expected) for w in np.ndindex(*([x.base] * k))]
        assert rep.max_dev == pytest.approx(max(devs), abs=1e-15)
        assert 0 <= rep.max_dev <= 1


@settings(max_examples=50)
@given(digit_seqs)
def test_aligned_and_sliding_agree_at_k1(x):
    a, s = aligned_block_freq(x, 1), sliding_block_freq(x, 1)
    assert (a.counts, a.n, a.max_dev) == (s.counts, s.n, s.max_dev)


def test_normality_score_all_zeros():
    x = DigitSeq(3, [0] * 60)
    assert normality_score(x, 3) == [(k, pytest.approx(1 - 3.0**-k)) for k in (1, 2, 3)]


def test_aligned_mu_sample_k3():
    x = sample_mu(SampleSpec(PrimeSet((2,)), 2, 10**5, 11))
    assert aligned_block_freq(x, 3).max_dev < 0.02


def test_sliding_iid_k4():
    x = DigitSeq(2, uniform_digits(2024, 2, 10**6))
    assert sliding_block_freq(x, 4).max_dev < 0.005


def test_required_precision_is_exact():
    for base, r, h, N in [(2, 3, 1, 10), (10, 7, 5, 30), (3, 2, 1, 1)]:
        L = required_precision(base, r, h, N)
        target = r**N * h * 2**64
        assert base**L >= target and base ** (L - 1) < target


def test_weyl_all_zeros_is_one():
    x = DigitSeq(2, [0] * required_precision(2, 3, 1, 50))
    assert weyl_sum(x, 3, 1, 50).value == pytest.approx(1.0)


def test_weyl_guard():
    need = required_precision(2, 3, 1, 20)
    with pytest.raises(PreconditionError, match=str(need)):
        weyl_sum(DigitSeq(2, [1] * (need - 1)), 3, 1, 20)
    with pytest.raises(ArgumentError):
        weyl_sum(DigitSeq(2, [1] * 200), 1, 1, 2)


@pytest.mark.parametrize("base, r, h, N, seed", [(2, 3, 1, 40, 0), (3, 2, 2, 25, 1), (10, 7, 3, 15, 2)])
def test_weyl_matches_big_integer_oracle(base, r, h, N, seed):
    digits = uniform_digits(seed, base, required_precision(base, r, h, N) + 5).tolist()
    got = weyl_sum(DigitSeq(base, digits), r, h, N)
    assert got.value == pytest.approx(weyl_oracle(digits, base, r, h, N), abs=1e-12)
    assert set(got.to_json()) == {"r", "h", "n", "precision", "value"}


def test_weyl_invariant_under_extra_digits():
    digits = uniform_digits(5, 2, 400)
    need = required_precision(2, 3, 1, 100)
    a = weyl_sum(DigitSeq(2, digits[:need]), 3, 1, 100).value
    b = weyl_sum(DigitSeq(2, digits), 3, 1, 100).value
    assert a == pytest.approx(b, abs=1e-12)
