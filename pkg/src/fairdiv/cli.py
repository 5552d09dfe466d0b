"""``fairdiv`` command line: solve, check, bench, oracle.

Exit codes: 0 success, 2 fairness or contract failure, 3 input error.
"""
from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from fractions import Fraction
from pathlib import Path

from .engine import EngineConfig
from .errors import CharityOverflow, ContractViolation, InputError, ParseError, TooLarge
from .generators import FAMILIES, GeneratorSpec
from .model import Allocation, format_value, load_instance, to_value
from .pipeline import bench, format_table, solve
from .verification import BruteForceOracle, fairness_report
from .welfare import format_p, parse_p

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 2, 3


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _read_json(path: str):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc


def _emit(obj):
    json.dump(obj, sys.stdout, indent=2, default=str)
    sys.stdout.write("\n")


def _config(args) -> EngineConfig:
    eps = args.epsilon
    if eps is None:
        eps = "0" if args.mode in ("half-efx", "A") else "1/20"
    return EngineConfig(args.mode, to_value(eps))


def cmd_solve(args) -> int:
    instance = load_instance(_read(args.instance))
    weights = None
    if args.weights:
        raw = _read_json(args.weights)
        if not isinstance(raw, list):
            raise ParseError("weights file must hold a JSON list")
        weights = [to_value(w) for w in raw]
        if len(weights) != instance.n:
            raise ParseError(f"need {instance.n} weights, got {len(weights)}")
    cfg = _config(args)
    report_ps = args.report_p or [args.p]
    try:
        rep = solve(instance, args.p, cfg, weights=weights, oracle=args.oracle,
                    report_ps=report_ps, reproducer_dir=args.reproducer_dir)
    except ContractViolation as exc:
        _emit({"error": str(exc), "reproducer": str(getattr(exc, "reproducer", ""))})
        return EXIT_FAIL
    _emit(rep.to_json())
    bad = not rep.contract.ok or rep.overflow or not all(rep.bound_ok.values())
    return EXIT_FAIL if bad else EXIT_OK


def cmd_check(args) -> int:
    instance = load_instance(_read(args.instance))
    X = Allocation.from_json(_read_json(args.allocation))
    if X.n != instance.n or not X.covers_within(instance.m):
        raise ParseError("allocation does not fit the instance")
    rep = fairness_report(instance, X, to_value(args.alpha))
    _emit(rep.to_json())
    ok = rep.ef1 and rep.alpha_efx and (not X.pool or rep.charity_ok)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_oracle(args) -> int:
    instance = load_instance(_read(args.instance))
    oracle = BruteForceOracle(instance)
    out = []
    for p in args.p:
        res = oracle.best(p)
        w = res.best_welfare
        out.append({
            "p": format_p(p),
            "allocation": res.best_allocation.to_json(),
            "values": [format_value(v) for v in res.best_values],
            "welfare": format_value(w) if isinstance(w, Fraction) else w,
            "top_single_goods": res.top_single_goods,
        })
    _emit(out)
    return EXIT_OK


def cmd_bench(args) -> int:
    specs = [GeneratorSpec(f, args.n, args.m, args.V, args.seed) for f in args.family]
    modes = [EngineConfig(m, to_value(args.epsilon if args.epsilon is not None else
                                      ("0" if m == "half-efx" else "1/20")))
             for m in args.mode]
    rows, table = bench(specs, args.p_list, modes, args.trials, args.workers)
    for r in rows:
        sys.stdout.write(json.dumps(r) + "\n")
    for r in table:
        sys.stdout.write(json.dumps({"aggregate": r}) + "\n")
    sys.stdout.flush()
    print(format_table(table), file=sys.stderr)
    bad = any("error" in r or not r["contract_ok"] or r["bound_ok"] is False or r["overflow"]
              for r in rows)
    return EXIT_FAIL if bad else EXIT_OK


def _p_arg(text):
    try:
        return parse_p(text)
    except InputError as exc:
        raise argparse.ArgumentTypeError(str(exc))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# argparse reads "-inf" and "-1/2" as unknown flags; a leading space makes
# it treat them as values (parse_p strips the space again)
_NEGATIVE = re.compile(r"^-(inf|infinity|\d+(/\d+)?|\d*\.\d+)$", re.IGNORECASE)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="fairdiv", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="seed, complete and verify an allocation")
    s.add_argument("--instance", required=True)
    s.add_argument("--p", type=_p_arg, required=True, help="-inf, 0 or a rational <= 1")
    s.add_argument("--mode", choices=["half-efx", "charity"], default="half-efx")
    s.add_argument("--epsilon", help="rational; default 0 (half-efx) or 1/20 (charity)")
    s.add_argument("--weights", help="JSON list of positive welfare weights")
    s.add_argument("--oracle", action="store_true", help="compare against brute force")
    s.add_argument("--report-p", type=_p_arg, nargs="+", help="extra p values to report")
    s.add_argument("--reproducer-dir")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("check", help="fairness report for a given allocation")
    c.add_argument("--instance", required=True)
    c.add_argument("--allocation", required=True)
    c.add_argument("--alpha", default="1")
    c.set_defaults(func=cmd_check)

    b = sub.add_parser("bench", help="random-instance benchmark")
    b.add_argument("--family", nargs="+", choices=FAMILIES, required=True)
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--m", type=int, required=True)
    b.add_argument("--trials", type=int, default=10)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--V", type=int, default=20)
    b.add_argument("--p-list", type=_p_arg, nargs="+", default=[parse_p(0)])
    b.add_argument("--mode", nargs="+", choices=["half-efx", "charity"],
                   default=["half-efx", "charity"])
    b.add_argument("--epsilon")
    b.add_argument("--workers", type=int, default=1)
    b.set_defaults(func=cmd_bench)

    o = sub.add_parser("oracle", help="brute-force welfare optimum")
    o.add_argument("--instance", required=True)
    o.add_argument("--p", type=_p_arg, nargs="+", required=True)
    o.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = ap.parse_args([" " + a if _NEGATIVE.match(a) else a for a in argv])
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, TooLarge) as exc:
        print(f"fairdiv: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ContractViolation, CharityOverflow) as exc:
        print(f"fairdiv: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
