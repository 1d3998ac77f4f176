"""Command-line front end: parsing, reduction, checking, elaboration,
conversion to the rigid system, translation, reversal, and the property
suites."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .corpus import generate_corpus
from .derivation import ElaborationError, RuleViolation, check_add, elaborate
from .parser import (
    ParseError,
    parse_aterm,
    parse_context,
    parse_fterm,
    parse_ftype,
    parse_term,
    parse_type,
)
from .reduction import normalize
from .structured import ConversionFailure, add_to_sadd, check_sadd
from .suites import SUITES, run_suite
from .sysf import f_check, show_fterm, show_ftype
from .syntax import show_term
from .translation import rev_term, rev_type, trans_term
from .typesys import Context, show_type


def _read_input(args) -> str:
    if args.input is not None:
        return args.input
    return sys.stdin.read()


def _ctx(args) -> Context:
    return Context(tuple(parse_context(args.ctx or "")))


def _emit(args, text_lines: list[str], payload: dict):
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("\n".join(text_lines))


def _cmd_parse(args) -> int:
    src = _read_input(args)
    match args.kind:
        case "term":
            shown = show_term(parse_term(src))
        case "type":
            shown = show_type(parse_type(src))
        case "fterm":
            shown = show_fterm(parse_fterm(src))
        case _:
            shown = show_ftype(parse_ftype(src))
    _emit(args, [shown], {"kind": args.kind, "canonical": shown})
    return 0


def _cmd_reduce(args) -> int:
    t = parse_term(_read_input(args))
    res = normalize(t, fuel=args.fuel)
    lines = [f"{str(s)}" for s in res.steps] + [show_term(res.term)]
    if res.exhausted:
        lines.append("(fuel exhausted)")
    _emit(args, lines, {
        "normal": not res.exhausted,
        "steps": len(res.steps),
        "result": show_term(res.term),
        "trace": [str(s) for s in res.steps],
    })
    return 1 if res.exhausted else 0


def _elaborated(args):
    a = parse_aterm(_read_input(args))
    d = elaborate(a, _ctx(args))
    check_add(d)
    return d


def _cmd_check(args) -> int:
    d = _elaborated(args)
    line = f"{show_term(d.term)} : {show_type(d.ty)}"
    _emit(args, ["ok: " + line], {"ok": True, "term": show_term(d.term), "type": show_type(d.ty)})
    return 0


def _cmd_elaborate(args) -> int:
    d = _elaborated(args)
    lines = d.describe().splitlines()
    _emit(args, lines, {"term": show_term(d.term), "type": show_type(d.ty),
                        "derivation": d.describe()})
    return 0


def _cmd_to_sadd(args) -> int:
    sd = add_to_sadd(_elaborated(args))
    check_sadd(sd)
    line = f"{show_term(sd.term)} : {show_type(sd.ty)}"
    _emit(args, [line], {"term": show_term(sd.term), "type": show_type(sd.ty)})
    return 0


def _cmd_translate(args) -> int:
    sd = add_to_sadd(_elaborated(args))
    res = trans_term(sd)
    f_check(res.fderivation)
    lines = [f"{show_fterm(res.fterm)} : {show_ftype(res.ftype)}"]
    _emit(args, lines, {"fterm": show_fterm(res.fterm), "ftype": show_ftype(res.ftype)})
    return 0


def _cmd_fcheck(args) -> int:
    sd = add_to_sadd(_elaborated(args))
    res = trans_term(sd)
    f_check(res.fderivation)
    lines = [f"ok: {show_fterm(res.fterm)} : {show_ftype(res.ftype)}"]
    _emit(args, lines, {"ok": True, "fterm": show_fterm(res.fterm),
                        "ftype": show_ftype(res.ftype)})
    return 0


def _cmd_reverse(args) -> int:
    if args.kind == "type":
        rt = rev_type(parse_ftype(_read_input(args)))
        shown = None if rt is None else show_type(rt)
    else:
        r = rev_term(parse_fterm(_read_input(args)))
        shown = None if r is None else show_term(r)
    _emit(args, [shown if shown is not None else "undefined"],
          {"defined": shown is not None, "result": shown})
    return 0


def _cmd_suite(args) -> int:
    corpus = generate_corpus(args.seed, args.corpus_budget, args.count)
    report = run_suite(args.name, corpus, cases=args.cases, budget=args.budget)
    if args.format == "json":
        print(json.dumps(report.to_json(), indent=2, sort_keys=True))
    else:
        print(report.render())
    return 0 if report.passed else 1


def _build_parser() -> argparse.ArgumentParser:
    default_seed = int(os.environ.get("ADDLAM_SEED", "1"))
    top = argparse.ArgumentParser(prog="addlam",
                                  description="workbench for a non-deterministic "
                                              "call-by-value calculus with sums")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, *, ctx=False, kind=None):
        p.add_argument("input", nargs="?", help="input text (defaults to stdin)")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--fuel", type=int, default=10000)
        p.add_argument("--budget", type=int, default=None)
        p.add_argument("--seed", type=int, default=default_seed)
        if ctx:
            p.add_argument("--ctx", default="", help="hypotheses, e.g. 'a: X, f: X -> X'")
        if kind:
            p.add_argument("--kind", choices=kind[0], default=kind[1])

    common(sub.add_parser("parse", help="parse and pretty-print"),
           kind=(("term", "type", "fterm", "ftype"), "term"))
    common(sub.add_parser("reduce", help="normalize a term, printing the trace"))
    for name, help_ in (("check", "type-check an annotated term"),
                        ("elaborate", "print the full typing derivation"),
                        ("to-sadd", "convert the derivation to the rigid system"),
                        ("translate", "translate into the polymorphic pair calculus"),
                        ("fcheck", "re-check the translated derivation")):
        common(sub.add_parser(name, help=help_), ctx=True)
    common(sub.add_parser("reverse", help="reverse-translate a target term or type"),
           kind=(("term", "type"), "term"))

    ps = sub.add_parser("suite", help="run a property suite")
    ps.add_argument("name", choices=SUITES)
    ps.add_argument("--format", choices=("text", "json"), default="text")
    ps.add_argument("--fuel", type=int, default=10000)
    ps.add_argument("--budget", type=int, default=None)
    ps.add_argument("--seed", type=int, default=default_seed)
    ps.add_argument("--cases", type=int, default=10000)
    ps.add_argument("--count", type=int, default=500, help="corpus size")
    ps.add_argument("--corpus-budget", type=int, default=20)
    return top


_COMMANDS = {
    "parse": _cmd_parse,
    "reduce": _cmd_reduce,
    "check": _cmd_check,
    "elaborate": _cmd_elaborate,
    "to-sadd": _cmd_to_sadd,
    "translate": _cmd_translate,
    "fcheck": _cmd_fcheck,
    "reverse": _cmd_reverse,
    "suite": _cmd_suite,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 2
    except (RuleViolation, ConversionFailure, ElaborationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
