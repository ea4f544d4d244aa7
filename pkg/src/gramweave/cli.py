"""The command-line surface of the workbench.

Exit codes: 0 success, 1 usage problems, 2 the input failed to parse or
validate, 3 an analysis found what it was told to treat as fatal
(cross-aspect conflicts under ``cpa --weaving --strict``, disagreeing
weave orders under ``commute``).

Default output is a pure function of the input file and flags —
``--timestamps`` opts into a generation stamp, which goes to stderr so
machine-readable stdout stays clean.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from itertools import permutations
from pathlib import Path
from typing import Optional

from .aspects import AspectedGrammar, WeaveError, grammar_isomorphic, weave_all, woven_semantics
from .cpa import (
    CpaReport,
    analyze_conflicts,
    analyze_dependencies,
    analyze_weaving,
    cross_aspect_interference,
)
from .dot import encoded_dot
from .encoding import encode_aogg_with_trace
from .engine import graph_hash, run_grammar
from .graphs import GraphError
from .parser import ParseError, ResolveError, doc_of_grammar, parse_grammar, print_doc
from .reports import cpa_to_doc, grammar_to_doc, trace_to_doc

__all__ = ["main"]


class _CliFailure(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code
        self.message = message


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _CliFailure(1, message)


def _load(path: str) -> AspectedGrammar:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _CliFailure(1, f"cannot read {path}: {exc.strerror or exc}")
    try:
        return parse_grammar(text)
    except (ParseError, ResolveError, GraphError, WeaveError) as exc:
        raise _CliFailure(2, str(exc))


def _write_output(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise _CliFailure(1, f"cannot write {path}: {exc.strerror or exc}")


def _json_text(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


# --- subcommands -------------------------------------------------------------


def _cmd_validate(args: argparse.Namespace) -> int:
    aogg = _load(args.file)
    advices = sum(len(aspect.advices) for aspect in aogg.aspects)
    print(
        f"ok: {len(aogg.base.rules)} rule(s), "
        f"{len(aogg.aspects)} aspect(s), {advices} advice(s)"
    )
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    aogg = _load(args.file)
    config = aogg.config_map
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    max_steps = (
        args.max_steps if args.max_steps is not None else config.get("max_steps", 100)
    )
    try:
        grammar = woven_semantics(aogg)
    except WeaveError as exc:
        raise _CliFailure(2, str(exc))
    trace = run_grammar(grammar, seed=seed, max_steps=max_steps)
    for step in trace.steps:
        print(f"{step.index}: {step.rule_key}")
    print(f"status: {trace.status}")
    print(f"steps: {len(trace.steps)}")
    print(f"final: {graph_hash(trace.final)}")
    if args.trace:
        _write_output(args.trace, _json_text(trace_to_doc(trace)))
        print(f"trace written: {args.trace}")
    return 0


def _cmd_weave(args: argparse.Namespace) -> int:
    aogg = _load(args.file)
    order: Optional[list[str]] = None
    if args.order:
        order = [name.strip() for name in args.order.split(",")]
        names = sorted(aspect.name for aspect in aogg.aspects)
        if sorted(order) != names:
            raise _CliFailure(
                1, f"--order must name the aspects {names} exactly once each"
            )
    try:
        woven = weave_all(aogg.base, aogg.aspects, order=order)
    except WeaveError as exc:
        raise _CliFailure(2, str(exc))
    text = print_doc(doc_of_grammar(woven))
    if args.output:
        _write_output(args.output, text)
        print(
            f"wove {len(aogg.aspects)} aspect(s) into "
            f"{len(woven.rules)} rule(s): {args.output}"
        )
    else:
        sys.stdout.write(text)
    return 0


def _cmd_encode(args: argparse.Namespace) -> int:
    aogg = _load(args.file)
    try:
        grammar, trace = encode_aogg_with_trace(aogg)
    except (GraphError, WeaveError) as exc:
        raise _CliFailure(2, str(exc))
    if args.format == "dot":
        text = encoded_dot(grammar.initial, trace, name="encoded")
    else:
        text = _json_text(grammar_to_doc(grammar))
    if args.output:
        _write_output(args.output, text)
        print(
            f"encoded {len(trace.encodings)} rule(s) and "
            f"{len(grammar.rules)} advice(s): {args.output}"
        )
    else:
        sys.stdout.write(text)
    return 0


def _matrix_table(report: CpaReport) -> list[str]:
    keys = report.keys
    label = max([len(k) for k in keys], default=0)
    widths = [max(len(k2), 1) for k2 in keys]
    lines = [
        " ".join(
            [" " * label] + [k2.rjust(w) for k2, w in zip(keys, widths)]
        ).rstrip()
    ]
    for key1 in keys:
        cells = [
            str(report.count(key1, key2)).rjust(w)
            for key2, w in zip(keys, widths)
        ]
        lines.append(" ".join([key1.ljust(label)] + cells).rstrip())
    return lines


def _cmd_cpa(args: argparse.Namespace) -> int:
    if args.strict and not args.weaving:
        raise _CliFailure(1, "--strict only applies to --weaving analyses")
    if args.weaving and args.mode == "dependencies":
        raise _CliFailure(1, "--weaving computes conflicts between advices")
    aogg = _load(args.file)
    try:
        if args.weaving:
            report = analyze_weaving(aogg, max_overlaps=args.max_overlaps)
            verdict = cross_aspect_interference(report, aogg)
        else:
            analyze = (
                analyze_conflicts if args.mode == "conflicts" else analyze_dependencies
            )
            report = analyze(aogg.base, max_overlaps=args.max_overlaps)
            verdict = None
    except OverflowError as exc:
        raise _CliFailure(2, str(exc))

    if args.format == "json":
        sys.stdout.write(_json_text(cpa_to_doc(report, verdict)))
    else:
        title = "advice conflicts" if args.weaving else report.mode
        print(f"{title} matrix, {len(report.keys)} rule(s):")
        for line in _matrix_table(report):
            print(f"  {line}")
        nonzero = sorted(report.nonzero())
        if nonzero:
            print("critical pairs:")
            for key1, key2 in nonzero:
                kinds = sorted(
                    {
                        v.kind
                        for analysis in report.cells[(key1, key2)]
                        for v in analysis.verdicts
                    }
                )
                count = report.count(key1, key2)
                print(f"  {key1} / {key2}: {count} ({', '.join(kinds)})")
        else:
            print("critical pairs: none")
        for (key1, key2), limit in sorted(report.truncated.items()):
            print(f"note: {key1} / {key2} truncated at {limit} overlaps")
        if verdict is not None:
            print(verdict.message)
    if args.strict and verdict is not None and not verdict.order_independent:
        return 3
    return 0


def _cmd_commute(args: argparse.Namespace) -> int:
    aogg = _load(args.file)
    names = [aspect.name for aspect in aogg.aspects]
    orders = [list(p) for p in permutations(names)] or [[]]
    try:
        woven = [
            (order, weave_all(aogg.base, aogg.aspects, order=order or None))
            for order in orders
        ]
    except WeaveError as exc:
        raise _CliFailure(2, str(exc))
    reference_order, reference = woven[0]
    disagreeing = [
        order
        for order, grammar in woven[1:]
        if not grammar_isomorphic(reference, grammar)
    ]
    if disagreeing:
        shown = ", ".join("[" + ",".join(order) + "]" for order in disagreeing)
        print(
            f"orders disagree: [{','.join(reference_order)}] is not "
            f"isomorphic to {shown}"
        )
        return 3
    print(
        f"orders agree: {len(orders)} weave order(s) produce isomorphic "
        f"grammars ({len(reference.rules)} rule(s))"
    )
    return 0


# --- wiring ------------------------------------------------------------------


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(
        prog="gramweave",
        description="Graph grammar workbench: run, weave, encode, analyze.",
    )
    common = _ArgumentParser(add_help=False)
    common.add_argument(
        "--timestamps",
        action="store_true",
        help="print a generation timestamp to stderr",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="parse and validate a grammar file")
    p.add_argument("file")
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("run", parents=[common], help="run the woven grammar")
    p.add_argument("file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--trace", metavar="OUT", help="write the run as JSON")
    p.set_defaults(handler=_cmd_run)

    p = sub.add_parser("weave", parents=[common], help="weave aspects into the base rules")
    p.add_argument("file")
    p.add_argument("--order", metavar="A,B,...", help="weave order (aspect names)")
    p.add_argument("-o", "--output", metavar="OUT")
    p.set_defaults(handler=_cmd_weave)

    p = sub.add_parser(
        "encode", parents=[common], help="encode the whole grammar as one graph"
    )
    p.add_argument("file")
    p.add_argument("-o", "--output", metavar="OUT")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.set_defaults(handler=_cmd_encode)

    p = sub.add_parser("cpa", parents=[common], help="pairwise interference matrices")
    p.add_argument("file")
    p.add_argument("--mode", choices=("conflicts", "dependencies"), default="conflicts")
    p.add_argument(
        "--weaving",
        action="store_true",
        help="analyze the encoded advices instead of the base rules",
    )
    p.add_argument("--strict", action="store_true", help="exit 3 on cross-aspect conflicts")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--max-overlaps", type=int, default=None)
    p.set_defaults(handler=_cmd_cpa)

    p = sub.add_parser(
        "commute", parents=[common], help="compare all weave orders up to isomorphism"
    )
    p.add_argument("file")
    p.set_defaults(handler=_cmd_commute)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.timestamps:
            stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
            print(f"generated: {stamp}", file=sys.stderr)
        return args.handler(args)
    except _CliFailure as failure:
        print(f"error: {failure.message}", file=sys.stderr)
        return failure.code
