"""Toeplitz sequences, digit dependencies and finite-N normality statistics."""

__version__ = "0.1.0"

from .characterization import (
    CondIIQuery,
    condII_estimate,
    double_transform_witness,
    lemma5_check,
    removal_set,
    rho_J,
    sigma_perm,
)
from .index_arithmetic import (
    PrimeSet,
    decompose,
    delta,
    enumerate_K,
    equivalent,
    gap_scan,
    unrank_L,
)
from .independence_lab import (
    CounterexampleParams,
    counterexample_digits,
    dyadic_block_report,
    window_certify,
)
from .normality_metrics import aligned_block_freq, normality_score, sliding_block_freq, weyl_sum
from .spectral_bounds import (
    L2Query,
    RieszQuery,
    exponent_fit,
    l2_exponential_sum_mu,
    m_q,
    riesz_product_sum,
)
from .toeplitz_core import (
    DigitSeq,
    SampleSpec,
    enumerate_TP,
    extract_free,
    is_toeplitz,
    sample_mu,
    toeplitz_transform,
    value_of,
)

__all__ = [
    "CondIIQuery",
    "CounterexampleParams",
    "DigitSeq",
    "L2Query",
    "PrimeSet",
    "RieszQuery",
    "SampleSpec",
    "aligned_block_freq",
    "condII_estimate",
    "counterexample_digits",
    "decompose",
    "delta",
    "double_transform_witness",
    "dyadic_block_report",
    "enumerate_K",
    "enumerate_TP",
    "equivalent",
    "exponent_fit",
    "extract_free",
    "gap_scan",
    "is_toeplitz",
    "l2_exponential_sum_mu",
    "lemma5_check",
    "m_q",
    "normality_score",
    "removal_set",
    "rho_J",
    "riesz_product_sum",
    "sample_mu",
    "sigma_perm",
    "sliding_block_freq",
    "toeplitz_transform",
    "unrank_L",
    "value_of",
    "weyl_sum",
    "window_certify",
]
