"""Command-line front end: ``cacmod COMMAND FILE ...``."""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone

from .closure import general_schema_equation, general_schema_rule
from .conditions import FAIL, PASS, UNKNOWN, assemble_report
from .confluence import confluence_verdict
from .errors import CacError
from .reduction import joinable_modulo, normalize_with_trace
from .signature import Limits
from .syntax import load_file, parse_env, parse_term
from .terms import show, spine_path
from .typecheck import check_env, convertible, infer, infer_sort

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="declaration file")
    common.add_argument("--json", action="store_true", help="print the JSON report")
    common.add_argument("--max-class-size", type=int, default=Limits.max_class_size,
                        help="bound on the size of enumerated equivalence classes")
    common.add_argument("--fuel", type=int, default=Limits.fuel, help="step budget of normalization")
    common.add_argument("--strict", action="store_true", help="exit with 2 on UNKNOWN verdicts")

    p = argparse.ArgumentParser(prog="cacmod", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="strong-normalization conditions")
    c.add_argument("--attest-fo-sn", action="store_true",
                   help="assume termination of the first-order rules modulo the first-order equations")
    c.add_argument("--search-steps", type=int, default=10_000,
                   help="budget of the non-termination refutation search")
    c.add_argument("--search-depth", type=int, default=4,
                   help="depth of the small terms seeding the refutation search")
    c.add_argument("--timestamp", action="store_true", help="add a timestamp to the JSON report")

    sub.add_parser("schema", parents=[common], help="General Schema for each rule and equation")

    cf = sub.add_parser("confluence", parents=[common], help="critical pairs and confluence modulo")
    cf.add_argument("--attest-fo-sn", action="store_true",
                    help="as for check; strong normalization comes from the condition report")

    t = sub.add_parser("typecheck", parents=[common], help="check TERM : TYPE")
    t.add_argument("term")
    t.add_argument("type")
    t.add_argument("--env", default="", help="environment, e.g. '[x:nat, y:nat]'")

    n = sub.add_parser("normalize", parents=[common], help="normal form of TERM")
    n.add_argument("term")
    n.add_argument("--trace", action="store_true", help="also print the reduction steps")

    j = sub.add_parser("join", parents=[common], help="are two terms joinable modulo?")
    j.add_argument("left")
    j.add_argument("right")
    return p


def _verdict_code(verdict: str, strict: bool) -> int:
    if verdict == PASS:
        return EXIT_PASS
    if verdict == UNKNOWN and strict:
        return EXIT_ERROR
    return EXIT_FAIL


def _print_json(data):
    print(json.dumps(data, indent=2, ensure_ascii=False))


def _cmd_check(args, sig) -> int:
    report = assemble_report(sig, args.attest_fo_sn, args.search_steps, args.search_depth, args.fuel)
    if args.json:
        stamp = datetime.now(timezone.utc).isoformat() if args.timestamp else None
        print(report.dumps(stamp))
    else:
        for c in report.conditions:
            flag = "" if c.required else " (not required)"
            print(f"[{c.verdict}] {c.id}{flag}: {c.statement}")
            if c.verdict in (FAIL, UNKNOWN):
                for ev in c.evidence:
                    if ev["verdict"] in (FAIL, UNKNOWN):
                        detail = {k: v for k, v in ev.items() if k not in ("subject", "verdict")}
                        print(f"    {ev['subject']}: {json.dumps(detail, ensure_ascii=False)}")
        print(f"overall: {report.overall}")
    return _verdict_code(report.overall, args.strict)


def _cmd_schema(args, sig) -> int:
    verdicts = [general_schema_rule(r, sig, args.fuel) for r in sig.rules]
    verdicts += [general_schema_equation(e, sig, args.fuel) for e in sig.equations]
    if args.json:
        _print_json([v.to_json() for v in verdicts])
    else:
        for v in verdicts:
            why = f" ({v.failed_rule}) {v.message}" if not v.passed else ""
            print(f"[{v.verdict}] {v.id}{why}")
    return EXIT_PASS if all(v.passed for v in verdicts) else EXIT_FAIL


def _cmd_confluence(args, sig) -> int:
    report = assemble_report(sig, args.attest_fo_sn, fuel=args.fuel)
    result = confluence_verdict(sig, sn_passed=report.overall == PASS, fuel=args.fuel)
    if args.json:
        _print_json(result.to_json())
    else:
        for cp, ok in result.critical_pairs:
            status = {True: "joinable", False: "NOT joinable", None: "undecided"}[ok]
            print(f"{cp.kind} {cp.outer}/{cp.inner} at {spine_path(cp.outer_lhs, cp.position)}: "
                  f"{show(cp.peak)} -> ({show(cp.pair[0])}, {show(cp.pair[1])}) {status}")
        print(f"verdict: {result.verdict}")
        if result.theorem_used:
            print(f"theorem: {result.theorem_used}")
        for b in result.blocking_conditions:
            print(f"blocked by: {b}")
        if result.confluent:
            print(f"note: {result.notes[-1]}")
    if result.confluent:
        return EXIT_PASS
    return _verdict_code(result.verdict, args.strict)


def _cmd_typecheck(args, sig) -> int:
    env = parse_env(args.env, sig) if args.env else ()
    check_env(env, sig)
    term = parse_term(args.term, sig)
    ty = parse_term(args.type, sig)
    inferred = infer(env, term, sig)
    ok = inferred == ty or (_is_type(sig, env, ty) and convertible(inferred, ty, sig))
    if args.json:
        _print_json({"term": show(term), "type": show(ty), "inferred": show(inferred), "ok": ok})
    else:
        print(f"{show(term)} : {show(inferred)}")
        print("ok" if ok else f"type mismatch: expected {show(ty)}")
    return EXIT_PASS if ok else EXIT_FAIL


def _is_type(sig, env, ty) -> bool:
    try:
        infer_sort(sig, env, ty)
        return True
    except CacError:
        return False


def _cmd_normalize(args, sig) -> int:
    term = parse_term(args.term, sig)
    nf, trace = normalize_with_trace(term, sig, args.fuel)
    if args.json:
        out = {"term": show(term), "normal_form": show(nf)}
        if args.trace:
            out["trace"] = trace.to_json(term, sig)
        _print_json(out)
    else:
        print(show(nf))
        if args.trace:
            for step in trace.to_json(term, sig):
                print(f"  {json.dumps(step, ensure_ascii=False)}")
    return EXIT_PASS


def _cmd_join(args, sig) -> int:
    left, right = parse_term(args.left, sig), parse_term(args.right, sig)
    ok = joinable_modulo(left, right, sig, args.fuel)
    if args.json:
        _print_json({"left": show(left), "right": show(right), "joinable": ok})
    else:
        print("true" if ok else "false")
    return EXIT_PASS if ok else EXIT_FAIL


COMMANDS = {
    "check": _cmd_check,
    "schema": _cmd_schema,
    "confluence": _cmd_confluence,
    "typecheck": _cmd_typecheck,
    "normalize": _cmd_normalize,
    "join": _cmd_join,
}


def run(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_PASS
    try:
        sig = load_file(args.file, Limits(args.max_class_size, args.fuel))
        return COMMANDS[args.command](args, sig)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
    except CacError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
    return EXIT_ERROR


def main():
    sys.exit(run())
