"""Command-line front end.

Subcommands cover single prices and integrals, the method-by-strategy
comparison table, the two censuses, the quadrature failure demo, and
chain calibration. Machine output goes to stdout (CSV or JSON), human
commentary and timings to stderr. Exit codes: 0 success, 2 bad input,
3 the primary result did not converge.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import replace

from .calibration import CalibrationSettings, calibrate
from .census import SamplingPlan, run_problematic_census, run_switch_census
from .chainio import ChainParseError, dump_report, read_chain
from .failure import analytic_E0, blowup_profile
from .model import MarketQuote
from .precision import check_digits, default_digits
from .pricing import _RealPart, params_from_vector, price_call
from .quadrature import (GaussKronrod715, GaussLegendre, QuadSpec, Trapezoid,
                         integrate_semi_infinite, method_from_name)
from .switching import (SWITCH_MODES, ExtendedFull, Optimized, WorkingOnly,
                        decide, make_evaluator, strategy_for_mode)
from .testcases import parse_case_name

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOT_CONVERGED = 3

MODELS = ("heston", "bates", "afsvjd")


def _parse_param_list(text: str) -> list[float]:
    values = []
    for pos, token in enumerate(text.split(","), start=1):
        token = token.strip()
        try:
            values.append(float(token))
        except ValueError:
            raise ValueError(
                f"--params entry {pos} is not a number: {token!r}") from None
    return values


def _resolve_digits(args) -> int:
    if getattr(args, "digits", None) is None:
        return default_digits()
    return check_digits(args.digits)


def _quad_spec(args) -> QuadSpec:
    return QuadSpec(method=method_from_name(args.quad),
                    abs_tol=args.abstol, rel_tol=args.reltol,
                    max_fevals=args.max_fevals)


def _build_problem(args):
    values = _parse_param_list(args.params)
    params = params_from_vector(args.model, values, epsilon=args.epsilon)
    quote = MarketQuote(tau=args.tau, strike=args.strike,
                        rate=args.rate, spot=args.spot)
    digits = _resolve_digits(args)
    strategy = strategy_for_mode(args.switch, decide(params, quote), digits)
    return params, quote, strategy


def _cmd_price(args) -> int:
    params, quote, strategy = _build_problem(args)
    spec = _quad_spec(args)
    t0 = time.perf_counter()
    res = price_call(params, quote, spec=spec, strategy=strategy)
    elapsed = time.perf_counter() - t0
    d = res.decision
    print(f"price      {res.price:.6f}")
    print(f"integral   {res.integral:.12g}")
    print(f"strategy   {res.strategy_used} (o={d.o:.3f} f0={d.f0:.6g} par={d.par})")
    print(f"fevals     {res.quad.fevals}")
    print(f"converged  {res.converged}")
    print(f"# {elapsed:.3f}s", file=sys.stderr)
    if args.json:
        dump_report(res, args.json)
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def _cmd_integrate(args) -> int:
    params, quote, strategy = _build_problem(args)
    spec = _quad_spec(args)
    ev = make_evaluator(strategy, params, quote)
    t0 = time.perf_counter()
    res = integrate_semi_infinite(_RealPart(ev), 0.0, spec)
    elapsed = time.perf_counter() - t0
    print(f"value             {res.value:.15g}")
    print(f"error_estimate    {res.error_estimate:.6g}")
    print(f"fevals            {res.fevals}")
    print(f"subintervals      {res.subintervals}")
    print(f"truncation_upper  {res.truncation_upper}")
    print(f"converged         {res.converged}")
    for w in res.warnings:
        print(f"warning           {w}")
    print(f"# {elapsed:.3f}s", file=sys.stderr)
    if args.json:
        dump_report(res, args.json)
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def _cmd_compare(args) -> int:
    case = parse_case_name(args.case)
    digits = _resolve_digits(args)
    base = QuadSpec(abs_tol=args.abstol, rel_tol=args.reltol,
                    max_fevals=args.max_fevals)

    def run(method, strategy):
        ev = make_evaluator(strategy, case.params, case.quote)
        spec = replace(base, method=method)
        t0 = time.perf_counter()
        res = integrate_semi_infinite(_RealPart(ev), 0.0, spec)
        return res, time.perf_counter() - t0

    ref, ref_secs = run(GaussKronrod715(), ExtendedFull(digits))
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["label", "value", "error_vs_reference", "fevals",
                     "converged", "seconds"])
    writer.writerow(["integral-extended", f"{ref.value:.10f}", "0",
                     ref.fevals, ref.converged, f"{ref_secs:.3f}"])
    # the coarse trapezoid step keeps the extended rows affordable
    methods = [("trapezoid", Trapezoid(h=0.01)),
               ("gauss-legendre", GaussLegendre(n=128)),
               ("simpson", method_from_name("simpson")),
               ("lobatto", method_from_name("lobatto")),
               ("gk715", GaussKronrod715())]
    strategies = [("working", WorkingOnly()),
                  ("extended", ExtendedFull(digits)),
                  ("opt", Optimized(digits))]
    for mname, method in methods:
        for sname, strategy in strategies:
            res, secs = run(method, strategy)
            writer.writerow([f"{mname}-{sname}", f"{res.value:.10f}",
                             f"{abs(res.value - ref.value):.3e}",
                             res.fevals, res.converged, f"{secs:.3f}"])
    return EXIT_OK


def _plan_from_args(args) -> SamplingPlan:
    return SamplingPlan(n=args.n, sigma_range=(args.sigma_lo, args.sigma_hi),
                        epsilon=args.epsilon, log_sigma=args.log_sigma,
                        quote_source=args.quote, seed=args.seed)


def _bin_sort_key(label: str):
    if label == "-inf":
        return (-1, -math.inf)
    if label == "+inf":
        return (1, math.inf)
    return (0, int(label))


def _emit_census(rep, args) -> None:
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["bin", "count"])
    for label in sorted(rep.bin_counts, key=_bin_sort_key):
        writer.writerow([label, rep.bin_counts[label]])
    frac = rep.switch_fraction
    print(f"# total={rep.total} switch_on={rep.switch_on} ({frac:.4f}) "
          f"f0_gate_failed={rep.f0_gate_failed}", file=sys.stderr)
    if args.json:
        dump_report(rep, args.json)


def _cmd_switch_census(args) -> int:
    rep = run_switch_census(_plan_from_args(args), threads=args.threads)
    _emit_census(rep, args)
    return EXIT_OK


def _cmd_problem_census(args) -> int:
    spec = QuadSpec(abs_tol=args.abstol, rel_tol=args.reltol)
    rep = run_problematic_census(_plan_from_args(args), spec=spec,
                                 threads=args.threads)
    _emit_census(rep, args)
    print(f"# problematic={rep.problematic} crosstab={rep.crosstab}",
          file=sys.stderr)
    for finding in rep.findings:
        print(f"# finding: {finding}", file=sys.stderr)
    return EXIT_OK


def _cmd_failure_demo(args) -> int:
    e0 = analytic_E0(args.n, args.eps)
    spec = QuadSpec(abs_tol=args.abstol, rel_tol=args.reltol)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["level", "leaves", "fevals", "value", "true_error",
                     "error_estimate", "analytic_e0", "deceived"])
    for level in range(1, args.level + 1):
        tr = blowup_profile(args.n, level, args.eps, spec=spec)
        writer.writerow([level, tr.leaves, tr.fevals, f"{tr.value:.12g}",
                         f"{tr.true_error:.6e}", f"{tr.error_estimate:.6e}",
                         f"{e0:.6e}", tr.deceived])
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    chain = read_chain(args.chain)
    settings = CalibrationSettings(
        model=args.model, switch_mode=args.switch, sigma_lb=args.sigma_lb,
        population=args.population, generations=args.generations,
        seed=args.seed, digits=_resolve_digits(args),
        quad=QuadSpec(abs_tol=args.abstol, rel_tol=args.reltol,
                      max_fevals=args.max_fevals),
        lsq_max_iters=args.lsq_iters, threads=args.threads)
    t0 = time.perf_counter()
    rep = calibrate(chain, settings)
    elapsed = time.perf_counter() - t0
    if args.out:
        dump_report(rep, args.out)
        print(f"report written to {args.out}", file=sys.stderr)
    else:
        json.dump({"schema_version": 1, "kind": "calibration",
                   "payload": rep.as_dict()}, sys.stdout, indent=2)
        print()
    ss = rep.switch_stats
    print(f"# G={rep.G:.6g} aare={rep.aare:.4g} mare={rep.mare:.4g} "
          f"switched={ss['switched_to_extended']}/{ss['decisions_total']} "
          f"{elapsed:.1f}s", file=sys.stderr)
    return EXIT_OK


def _add_quad_flags(p, abstol=1e-10, reltol=1e-6, fevals=10_000_000):
    p.add_argument("--abstol", type=float, default=abstol,
                   help=f"absolute tolerance (default {abstol:g})")
    p.add_argument("--reltol", type=float, default=reltol,
                   help=f"relative tolerance (default {reltol:g})")
    p.add_argument("--max-fevals", type=int, default=fevals,
                   help=f"evaluation budget (default {fevals:g})")


def _add_digits_flag(p):
    p.add_argument("--digits", type=int, default=None,
                   help="extended-precision decimal digits "
                        "(default 32, or QUADPRICE_DIGITS)")


def _add_problem_flags(p):
    p.add_argument("--model", choices=MODELS, required=True)
    p.add_argument("--params", required=True,
                   help="comma-separated parameter vector for --model")
    p.add_argument("--tau", type=float, required=True, help="years to expiry")
    p.add_argument("--strike", type=float, required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--spot", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=1e-6,
                   help="kernel-flattening parameter (default 1e-6)")
    p.add_argument("--quad", default="gk715",
                   help="quadrature: gk715 | simpson | lobatto | "
                        "trapezoid[:h] | gauss-legendre[:n]")
    _add_quad_flags(p)
    _add_digits_flag(p)
    p.add_argument("--switch", choices=SWITCH_MODES, default="auto")
    p.add_argument("--json", default=None, help="also write the result here")


def _add_census_flags(p):
    p.add_argument("--n", type=int, required=True, help="number of draws")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma-lo", type=float, required=True)
    p.add_argument("--sigma-hi", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--log-sigma", action="store_true",
                   help="sample sigma log-uniformly instead of uniformly")
    p.add_argument("--quote", choices=("sampled", "fixed"), default="sampled",
                   help="draw quotes from market ranges or reuse the index quote")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--json", default=None, help="also write the report here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadprice",
        description="Precision-aware option pricing and integration toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("price", help="price one European call")
    _add_problem_flags(p)
    p.set_defaults(func=_cmd_price)

    p = sub.add_parser("integrate", help="the pricing integral with diagnostics")
    _add_problem_flags(p)
    p.set_defaults(func=_cmd_integrate)

    p = sub.add_parser("compare",
                       help="all quadratures x strategies on a named case")
    p.add_argument("case", help="case name, e.g. tc1-sigma=0.001")
    _add_quad_flags(p)
    _add_digits_flag(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("switch-census", help="decision-rule census (cheap)")
    _add_census_flags(p)
    p.set_defaults(func=_cmd_switch_census)

    p = sub.add_parser("problem-census",
                       help="dual-integration census (expensive)")
    _add_census_flags(p)
    _add_quad_flags(p, abstol=1e-10, reltol=1e-9)
    p.set_defaults(func=_cmd_problem_census)

    p = sub.add_parser("failure-demo", help="adaptive-GK deception trace")
    p.add_argument("--n", type=int, default=7, help="Gauss node count")
    p.add_argument("--level", type=int, required=True,
                   help="deepest alignment level to trace")
    p.add_argument("--eps", type=float, default=1e-4, help="plateau offset")
    _add_quad_flags(p)
    p.set_defaults(func=_cmd_failure_demo)

    p = sub.add_parser("calibrate", help="fit a model to a chain CSV")
    p.add_argument("--chain", required=True, help="chain CSV file")
    p.add_argument("--model", choices=MODELS, default="afsvjd")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--switch", choices=SWITCH_MODES, default="auto")
    p.add_argument("--sigma-lb", type=float, default=1e-4,
                   help="vol-of-vol lower bound (default 1 bps)")
    p.add_argument("--population", type=int, default=200)
    p.add_argument("--generations", type=int, default=20)
    p.add_argument("--lsq-iters", type=int, default=200)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    _add_quad_flags(p)
    _add_digits_flag(p)
    p.add_argument("--out", default=None, help="write the report JSON here")
    p.set_defaults(func=_cmd_calibrate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ChainParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except KeyError as exc:
        print(f"error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
