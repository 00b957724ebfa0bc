"""Command-line front end.

Every subcommand is a thin wrapper over one library operation and writes a
self-describing JSON report (config, seed and versions embedded).  Failures
exit nonzero with an ``{"error": {...}}`` object on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .characterization import (
    CondIIQuery,
    condII_estimate,
    lemma5_check,
    lemma5_required_len,
    removal_set,
    sigma_perm,
)
from .dseq import read_dseq, write_dseq
from .errors import ArgumentError, NormalityLabError
from .independence_lab import (
    CounterexampleParams,
    counterexample_digits,
    delta_keymap,
    dyadic_block_report,
    sqrt_window,
    window_certify,
)
from .index_arithmetic import PrimeSet, decompose, gap_scan
from .normality_metrics import aligned_block_freq, sliding_block_freq, weyl_sum
from .rng import derive_seed, uniform_digits
from .spectral_bounds import (
    L2Query,
    RieszQuery,
    exponent_fit,
    l2_exponential_sum_mu,
    m_q,
    riesz_product_sum,
    sweep_csv,
)
from .toeplitz_core import BUDGET_ENV, DigitSeq, SampleSpec, sample_mu, toeplitz_transform


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("UsageError", 2, message)
        sys.exit(2)


def _emit_error(kind: str, code: int, message: str) -> None:
    err = {"error": {"type": kind, "code": code, "message": message}}
    sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")


def _provenance() -> dict:
    return {
        "tool": "normality-lab",
        "version": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
    }


def _config(args: argparse.Namespace) -> dict:
    skip = {"func", "report"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# -- subcommands ---------------------------------------------------------------


def cmd_decompose(args):
    P = PrimeSet.parse(args.primes)
    return {"decompositions": [decompose(P, n).to_json() for n in args.n]}


def cmd_transform(args):
    P = PrimeSet.parse(args.primes)
    a = read_dseq(args.input)
    t = toeplitz_transform(P, a, args.len)
    write_dseq(args.dseq, t)
    return {"output": args.dseq, "len": len(t), "base": t.base}


def cmd_sample(args):
    P = PrimeSet.parse(args.primes)
    x = sample_mu(SampleSpec(P, args.base, args.len, args.seed))
    write_dseq(args.dseq, x)
    return {"output": args.dseq, "len": len(x), "base": x.base}


def cmd_stats(args):
    x = read_dseq(args.input)
    reports = []
    for k in range(1, args.kmax + 1):
        if args.mode in ("aligned", "both"):
            reports.append(aligned_block_freq(x, k).to_json())
        if args.mode in ("sliding", "both"):
            reports.append(sliding_block_freq(x, k).to_json())
    return {"reports": reports}


def cmd_weyl(args):
    x = read_dseq(args.input)
    return weyl_sum(x, args.r, args.h, args.n).to_json()


def cmd_gap_scan(args):
    P = PrimeSet.parse(args.primes)
    out = {"gap": gap_scan(P, args.N, args.floor).to_json()}
    if args.certify:
        start = max(1, args.floor)
        out["certify"] = window_certify(delta_keymap(P), args.N, sqrt_window, start).to_json()
    return out


def cmd_counterexample(args):
    params = CounterexampleParams(args.base, args.K, args.seed)
    x = counterexample_digits(params, args.len)
    if args.dseq:
        write_dseq(args.dseq, x)
    report = dyadic_block_report(x, args.digit, params)
    return {"output": args.dseq, "dyadic": report.to_json()}


def cmd_condii(args):
    x = read_dseq(args.input)
    text = args.query if args.query.lstrip().startswith("{") else Path(args.query).read_text()
    q = CondIIQuery.from_json(text)
    res = condII_estimate(x, q, args.p1, args.p2, args.N)
    return {"query": q.to_json(), "estimate": res.to_json()}


def cmd_lemma5(args):
    rs = removal_set(args.p1, args.p2, args.k)
    sigma = sigma_perm(rs)
    need = lemma5_required_len(rs, args.windows)

    def trial(t: int) -> int:
        x = DigitSeq(args.base, uniform_digits(derive_seed(args.seed, t), args.base, need))
        return sum(not lemma5_check(x, rs, i, sigma) for i in range(1, args.windows + 1))

    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        failures = list(pool.map(trial, range(args.trials)))
    return {
        "passed": not any(failures),
        "trials": args.trials,
        "windows": args.windows,
        "failed_windows": sum(failures),
        "removed": len(rs.J),
        "kept": rs.kept_len,
    }


def cmd_bounds(args):
    if args.kind == "mq":
        v = m_q(args.base, args.ell, args.q)
        return {
            "numerator": v.numerator,
            "denominator": v.denominator,
            "single_term": v == Fraction(1, args.base**args.q),
        }
    if args.kind == "riesz":
        rows = []
        for N in args.N:
            q = RieszQuery(args.base, args.r, args.L, args.J, N, args.tail_tol)
            res = riesz_product_sum(q)
            rows.append((N, res.value, None))
    else:
        rows = []
        for point in args.points:
            k, m, ell = (int(t) for t in point.split(":"))
            q = L2Query(args.base, args.r, args.h, m, k, ell, args.mode, args.samples, args.seed)
            res = l2_exponential_sum_mu(q)
            rows.append((k, res.value, res.stderr))
    if args.format == "csv":
        return sweep_csv(rows)
    fit = exponent_fit((s, v) for s, v, _ in rows).to_json() if len(rows) >= 3 else None
    return {"rows": [{"scale": s, "value": v, "stderr": e} for s, v, e in rows], "fit": fit}


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="normality-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--report", help="write the JSON/CSV report here (default: stdout)")
    parser.add_argument("--threads", type=int, default=1, help="cap on worker threads")
    parser.add_argument("--budget", type=int, help=f"enumeration budget (overrides ${BUDGET_ENV})")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("decompose", help="n = l * prod p_i^e_i with rank delta(n)")
    p.add_argument("--primes", required=True)
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("transform", help="Toeplitz transform of a DSEQ file")
    p.add_argument("--primes", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--len", type=int, required=True)
    p.add_argument("--dseq", required=True, help="output DSEQ path")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("sample", help="draw a Toeplitz prefix from the uniform measure")
    p.add_argument("--primes", required=True)
    p.add_argument("--base", type=int, required=True)
    p.add_argument("--len", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--dseq", default="sample.dseq")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("stats", help="block frequency reports")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--kmax", type=int, default=1)
    p.add_argument("--mode", choices=("aligned", "sliding", "both"), default="aligned")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("weyl", help="normalised Weyl sum |S_N|/N")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--h", type=int, default=1)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_weyl)

    p = sub.add_parser("gap-scan", help="gaps between consecutive equivalent indices")
    p.add_argument("--primes", required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--floor", type=int, default=1)
    p.add_argument("--certify", action="store_true", help="also certify floor(2 sqrt n) windows")
    p.set_defaults(func=cmd_gap_scan)

    p = sub.add_parser("counterexample", help="generate the log-log counterexample")
    p.add_argument("--base", type=int, default=2)
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--len", type=int, required=True)
    p.add_argument("--digit", type=int, default=0)
    p.add_argument("--dseq")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("condii", help="estimate a block-family frequency")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--query", required=True, help="JSON {k, words, offsets}, inline or a file path")
    p.add_argument("--p1", type=int, required=True)
    p.add_argument("--p2", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.set_defaults(func=cmd_condii)

    p = sub.add_parser("lemma5", help="check the block rearrangement identity")
    p.add_argument("--p1", type=int, required=True)
    p.add_argument("--p2", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--windows", type=int, default=100)
    p.add_argument("--base", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_lemma5)

    p = sub.add_parser("bounds", help="M_q, Riesz product sums, L2 integrals")
    p.add_argument("kind", choices=("mq", "riesz", "l2"))
    p.add_argument("--base", type=int, default=2)
    p.add_argument("--r", type=int, default=3)
    p.add_argument("--h", type=int, default=1)
    p.add_argument("--ell", type=int, help="mq: truncation length")
    p.add_argument("--q", type=int, help="mq: position")
    p.add_argument("--L", type=int, default=1024)
    p.add_argument("--J", type=int, default=10)
    p.add_argument("--N", type=int, nargs="+", default=[256, 1024, 4096])
    p.add_argument("--tail-tol", type=float, default=1e-3)
    p.add_argument("--points", nargs="+", default=["4:7:20", "8:11:32"], help="l2: k:m:ell triples")
    p.add_argument("--mode", choices=("exact", "montecarlo"), default="exact")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_bounds)
    return parser


def _validate(args) -> None:
    if args.threads < 1:
        raise ArgumentError("--threads must be >= 1")
    if args.budget is not None:
        if args.budget < 1:
            raise ArgumentError("--budget must be positive")
        os.environ[BUDGET_ENV] = str(args.budget)
    if args.command == "bounds" and args.kind == "mq" and (args.ell is None or args.q is None):
        raise ArgumentError("bounds mq needs --ell and --q")
    if args.command == "bounds" and args.kind == "mq" and args.format == "csv":
        raise ArgumentError("mq is a single value; csv is for sweeps only")
    for name in ("input", "query"):
        path = getattr(args, name, None)
        if name == "query" and path is not None and path.lstrip().startswith("{"):
            continue
        if path is not None and not Path(path).exists():
            raise ArgumentError(f"input file {path} does not exist")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    saved_budget = os.environ.get(BUDGET_ENV)
    try:
        _validate(args)
        result = args.func(args)
    except NormalityLabError as exc:
        _emit_error(type(exc).__name__, exc.code, str(exc))
        return exc.code
    except OSError as exc:
        _emit_error(type(exc).__name__, 3, str(exc))
        return 3
    finally:
        if saved_budget is None:
            os.environ.pop(BUDGET_ENV, None)
        else:
            os.environ[BUDGET_ENV] = saved_budget
    header = {"provenance": _provenance(), "command": args.command, "config": _config(args)}
    if isinstance(result, str):
        # csv sweeps carry their provenance as a leading comment line
        text = "# " + json.dumps(header, sort_keys=True) + "\n" + result
    else:
        text = json.dumps({**header, "result": result}, indent=2, sort_keys=True) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
