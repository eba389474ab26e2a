"""Command-line interface.

    hbd translate FILE [--strategy fbpar|incr|fbless|random] [--seed N]
                       [--mode flatten|recursive] [--emit term|dot]
    hbd check FILE [--seeds N] [--samples M] [--mode ...]
    hbd simulate FILE --inputs CSV [--steps N] [--strategy ...]
    hbd axioms [--instances N] [--samples M] [--seed N]
    hbd print FILE

Exit codes: 0 success; 1 equivalence or axiom counterexample; 2 parse/type
errors; 3 feedbackless precondition violation (cycle witness printed);
4 fixpoint divergence during simulation.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

from .axioms import run_axiom_suite
from .errors import (
    CycleError,
    FixpointDivergence,
    ParseError,
    PreconditionError,
    SchemaError,
    TypeMismatchError,
)
from .frontend import FbLess, DiagramDoc, dot_doc, dump_doc, flatten_or_recurse, parse_doc
from .harness import run_determinacy
from .semantics import BOT
from .sim import simulate_translated
from .terms import print_term, rewrite_basic, term_size
from .translator import FeedbackParallel, Incremental, RandomChoices
from .types import BaseType

_PARSE_ERRORS = (ParseError, SchemaError, TypeMismatchError, CycleError, OSError)


def _default_seed() -> int:
    try:
        return int(os.environ.get("HBD_SEED", "0"))
    except ValueError:
        return 0


def _method(name: str, seed: int):
    if name == "fbpar":
        return FeedbackParallel()
    if name == "incr":
        return Incremental()
    if name == "random":
        return RandomChoices(seed)
    if name == "fbless":
        return FbLess()
    raise ValueError(f"unknown strategy {name!r}")


def _load(path: str) -> DiagramDoc:
    with open(path, "rb") as handle:
        return parse_doc(handle.read())


def cmd_translate(args) -> int:
    try:
        doc = _load(args.file)
        result = flatten_or_recurse(doc, args.mode, _method(args.strategy, args.seed))
    except _PARSE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"feedbackless precondition failed: {exc}", file=sys.stderr)
        return 3
    if args.emit == "dot":
        print(dot_doc(result.doc))
        return 0
    d = result.diagram
    body = rewrite_basic(d.body)
    print("inputs:  " + " ".join(f"{v.name}:{v.ty}" for v in d.inputs))
    print("outputs: " + " ".join(f"{v.name}:{v.ty}" for v in d.outputs))
    print(f"size:    {term_size(body)}")
    print("term:    " + print_term(body))
    return 0


def cmd_check(args) -> int:
    try:
        doc = _load(args.file)
        from .frontend import document_io_list

        diagrams, _, _ = document_io_list(doc, args.mode)
        report = run_determinacy(
            diagrams, seeds=range(args.seeds), samples=args.samples
        )
    except _PARSE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(report.render())
    return 0 if report.all_equivalent else 1


def _parse_cell(text: str, ty: BaseType):
    text = text.strip()
    if text == "bot":
        return BOT
    if ty is BaseType.BOOL:
        if text.lower() in ("true", "1"):
            return True
        if text.lower() in ("false", "0"):
            return False
        raise SchemaError(f"not a Bool literal: {text!r}")
    if ty is BaseType.INT:
        try:
            return int(text)
        except ValueError:
            raise SchemaError(f"not an Int literal: {text!r}") from None
    try:
        return float(text)
    except ValueError:
        raise SchemaError(f"not a Real literal: {text!r}") from None


def _read_csv(path: str, doc: DiagramDoc, steps):
    types = {e.name: e.ty for e in doc.inputs}
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError("empty csv") from None
        unknown = set(header) - set(types)
        missing = set(types) - set(header)
        if unknown or missing:
            raise SchemaError(
                f"csv header mismatch: unknown {sorted(unknown)}, missing {sorted(missing)}"
            )
        rows = []
        for raw in reader:
            if len(raw) != len(header):
                raise SchemaError(f"csv row arity {len(raw)} != header {len(header)}")
            rows.append(
                {name: _parse_cell(cell, types[name]) for name, cell in zip(header, raw)}
            )
    if steps is not None:
        rows = rows[:steps]
    return rows


def cmd_simulate(args) -> int:
    try:
        doc = _load(args.file)
        result = flatten_or_recurse(doc, "flatten", _method(args.strategy, args.seed))
        rows = _read_csv(args.inputs, result.doc, args.steps)
    except _PARSE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"feedbackless precondition failed: {exc}", file=sys.stderr)
        return 3
    try:
        trace = simulate_translated(result.diagram, result.state_table, rows)
    except FixpointDivergence as exc:
        print(f"fixpoint divergence: {exc}", file=sys.stderr)
        return 4
    except (SchemaError, TypeMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    in_names = [e.name for e in result.doc.inputs]
    out_names = [e.name for e in result.doc.outputs]
    state_names = [e.state.name for e in result.state_table]
    print(",".join(["step"] + in_names + out_names + [f"{s}@pre" for s in state_names]))
    for i, step in enumerate(trace.steps):
        cells = (
            [str(i)]
            + [_show(step.inputs[n]) for n in in_names]
            + [_show(step.outputs[n]) for n in out_names]
            + [_show(step.state_before[s]) for s in state_names]
        )
        print(",".join(cells))
    return 0


def _show(value) -> str:
    if value is BOT:
        return "bot"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def cmd_axioms(args) -> int:
    outcomes = run_axiom_suite(
        instances=args.instances, samples=args.samples, seed=args.seed
    )
    failed = 0
    for outcome in outcomes:
        status = "pass" if outcome.ok else "FAIL"
        print(f"axiom {outcome.name:<35} [{outcome.instances:4d} instances] {status}")
        if not outcome.ok:
            failed += 1
            row, lo, ro = outcome.failures[0]
            print(f"  counterexample: input={row} lhs={lo} rhs={ro}")
    print(f"{len(outcomes) - failed}/{len(outcomes)} axioms pass")
    return 0 if failed == 0 else 1


def cmd_print(args) -> int:
    try:
        doc = _load(args.file)
        print(dump_doc(doc))
    except _PARSE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hbd", description="block diagram to algebra-term translator"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    seed = _default_seed()

    p = sub.add_parser("translate", help="translate a diagram and print the term")
    p.add_argument("file")
    p.add_argument(
        "--strategy", choices=("fbpar", "incr", "fbless", "random"), default="incr"
    )
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--mode", choices=("flatten", "recursive"), default="flatten")
    p.add_argument("--emit", choices=("term", "dot"), default="term")
    p.set_defaults(fn=cmd_translate)

    p = sub.add_parser("check", help="determinacy harness: all strategies, pairwise")
    p.add_argument("file")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--mode", choices=("flatten", "recursive"), default="flatten")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("simulate", help="step the diagram on csv inputs")
    p.add_argument("file")
    p.add_argument("--inputs", required=True, help="csv with one column per input")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument(
        "--strategy", choices=("fbpar", "incr", "fbless", "random"), default="incr"
    )
    p.add_argument("--seed", type=int, default=seed)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("axioms", help="run the algebra law suite")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=seed)
    p.set_defaults(fn=cmd_axioms)

    p = sub.add_parser("print", help="dump the normalized document")
    p.add_argument("file")
    p.set_defaults(fn=cmd_print)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
