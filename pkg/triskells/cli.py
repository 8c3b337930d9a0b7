#!/usr/bin/env python3
"""
Command line for triskells.

Usage:
    triskells check thm5.1 --trials 100 --seed 42
    triskells check all --jobs 4 --out report.json
    triskells convert t.json t.dot --format dot
    triskells eval fock m.json
    triskells eval exec t.json --cut u
    triskells eval interpret --model ig proof.mll --atoms atoms.json

Exit codes: 0 when everything passed, 1 when a check failed, 2 on usage,
input or evaluation errors (reported as a JSON object on stderr).
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from .checks import SUITES, run_check
from .config import settings
from .errors import FormatError, TriskellError
from .fock import det_m, fock_lift, fock_rel, fock_sym, tr_m
from .mll import interp_ig, interp_wr, normalize
from .relmat import WeightedMatrix, contract, mat_compose, mat_dsum, mat_tensor
from .serialize import (
    assignment_from_json,
    atomic_write_json,
    atomic_write_text,
    dumps,
    load_object,
    number_to_json,
    read_json,
    read_proof,
    to_dot,
    to_json,
)
from .triskell import Triskell, compose, direct_sum, exec_trace, tensor, union
from .weights import measure_map

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _load(path: str) -> Any:
    return load_object(read_json(path), path)


def _load_triskell(path: str) -> Triskell:
    obj = _load(path)
    if not isinstance(obj, Triskell):
        raise FormatError("expected a triskell document", path)
    return obj


def _load_relation(path: str) -> WeightedMatrix:
    """A matrix document, or a triskell contracted to one."""
    obj = _load(path)
    if isinstance(obj, Triskell):
        return contract(obj)
    if not isinstance(obj, WeightedMatrix):
        raise FormatError("expected a matrix or triskell document", path)
    return obj


def _emit(result: Any, args: argparse.Namespace) -> None:
    pretty = settings().pretty_json
    if isinstance(result, str):
        text = result
    elif getattr(args, "format", "json") == "dot":
        if not isinstance(result, Triskell):
            raise FormatError("DOT output is only available for triskells")
        text = to_dot(result)
    else:
        doc = result if isinstance(result, dict) else to_json(result)
        text = dumps(doc, pretty) + "\n"
    if getattr(args, "out", None):
        atomic_write_text(text, args.out)
        print(f"Saved to {args.out}")
    else:
        sys.stdout.write(text)


# eval

def _binary(on_triskells: Callable, on_matrices: Optional[Callable]) -> Callable[[argparse.Namespace], Any]:
    def run(args: argparse.Namespace) -> Any:
        left, right = _load(args.left), _load(args.right)
        if isinstance(left, Triskell) and isinstance(right, Triskell):
            return on_triskells(left, right)
        if on_matrices is not None and isinstance(left, WeightedMatrix) and isinstance(right, WeightedMatrix):
            return on_matrices(left, right)
        raise FormatError("both operands must be triskells" + (" or both matrices" if on_matrices else ""))
    return run


def _split_points(text: Optional[str]) -> Optional[List[str]]:
    return None if text is None else [p.strip() for p in text.split(",") if p.strip()]


def _eval_exec(args: argparse.Namespace) -> Any:
    t = _load_triskell(args.triskell)
    u_src = _split_points(args.u_src) or args.cut
    u_tgt = _split_points(args.u_tgt) or args.cut
    if u_src is None or u_tgt is None:
        raise FormatError("exec needs --cut PREFIX or both --u-src and --u-tgt")
    return exec_trace(t, u_src, u_tgt)


def _eval_measure(kind: str) -> Callable[[argparse.Namespace], Any]:
    def run(args: argparse.Namespace) -> Any:
        t = _load_triskell(args.triskell)
        m = measure_map(args.measure, t.monoid)
        value = det_m(t, m) if kind == "det" else tr_m(t, m)
        return {"measure": m.name, "value": number_to_json(value)}
    return run


def _eval_interpret(args: argparse.Namespace) -> Any:
    proof = read_proof(args.proof)
    asg = assignment_from_json(read_json(args.atoms), args.atoms)
    return interp_ig(proof, asg) if args.model == "ig" else interp_wr(proof, asg)


EVAL_COMMANDS: Dict[str, Callable[[argparse.Namespace], Any]] = {
    "compose": _binary(compose, mat_compose),
    "tensor": _binary(tensor, mat_tensor),
    "sum": _binary(direct_sum, mat_dsum),
    "union": _binary(union, None),
    "exec": _eval_exec,
    "contract": lambda args: contract(_load_triskell(args.triskell)),
    "fock": lambda args: fock_rel(_load_relation(args.relation)),
    "focklift": lambda args: fock_lift(_load_triskell(args.triskell)),
    "focksym": lambda args: fock_sym(_load_triskell(args.triskell), args.degree),
    "detm": _eval_measure("det"),
    "trm": _eval_measure("trace"),
    "interpret": _eval_interpret,
    "normalize": lambda args: str(normalize(read_proof(args.proof))) + "\n",
}


# check / convert

def cmd_check(args: argparse.Namespace) -> int:
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    reports = []
    for name in names:
        report = run_check(name, seed=args.seed, trials=args.trials, tol=args.tol,
                           max_size=args.max_size, jobs=args.jobs)
        reports.append(report)
        for line in report.summary_lines():
            print(line)
    doc = reports[0].to_dict() if len(reports) == 1 else {"reports": [r.to_dict() for r in reports],
                                                          "ok": all(r.ok for r in reports)}
    if args.out:
        atomic_write_json(doc, args.out, settings().pretty_json)
        print(f"Report saved to {args.out}")
    if args.json:
        print(dumps(doc, settings().pretty_json))
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAILED


def cmd_convert(args: argparse.Namespace) -> int:
    if Path(args.input).suffix == ".dot":
        raise FormatError("DOT is an export-only format", args.input)
    obj = _load(args.input)
    if args.format == "dot":
        if not isinstance(obj, Triskell):
            raise FormatError("only triskells can be exported to DOT", args.input)
        atomic_write_text(to_dot(obj), args.output)
    else:
        atomic_write_json(to_json(obj), args.output, settings().pretty_json)
    print(f"Converted {args.input} -> {args.output}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    _emit(EVAL_COMMANDS[args.command](args), args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="triskells", description="Triskells, Fock functors and check suites")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="action", required=True)

    check = sub.add_parser("check", help="Run a randomized check suite")
    check.add_argument("suite", choices=sorted(SUITES) + ["all"], help="Suite name, or all")
    check.add_argument("--seed", type=int, default=None, help="Base seed (default from config.yaml)")
    check.add_argument("--trials", type=int, default=None, help="Number of trials")
    check.add_argument("--tol", type=float, default=None, help="Float tolerance")
    check.add_argument("--max-size", type=int, default=None, help="Carrier / dimension bound")
    check.add_argument("--jobs", type=int, default=None, help="Parallel trial workers")
    check.add_argument("--out", help="Write the JSON report to this path")
    check.add_argument("--json", action="store_true", help="Print the JSON report")
    check.set_defaults(handler=cmd_check)

    convert = sub.add_parser("convert", help="Convert a JSON document (json -> json|dot)")
    convert.add_argument("input")
    convert.add_argument("output")
    convert.add_argument("--format", choices=["json", "dot"], default="json")
    convert.set_defaults(handler=cmd_convert)

    ev = sub.add_parser("eval", help="Evaluate one operation")
    ops = ev.add_subparsers(dest="command", required=True)

    def op(name: str, help_text: str) -> argparse.ArgumentParser:
        p = ops.add_parser(name, help=help_text)
        p.add_argument("--out", help="Write the result here instead of stdout")
        p.add_argument("--format", choices=["json", "dot"], default="json")
        return p

    for name, help_text in (("compose", "f then g"), ("tensor", "tensor product"), ("sum", "direct sum"),
                            ("union", "union over shared carriers")):
        p = op(name, help_text)
        p.add_argument("left")
        p.add_argument("right")

    p = op("exec", "execution trace over a hidden part")
    p.add_argument("triskell")
    p.add_argument("--cut", help="Label prefix of the hidden points")
    p.add_argument("--u-src", help="Comma-separated hidden source points")
    p.add_argument("--u-tgt", help="Comma-separated hidden target points, paired with --u-src")

    for name, help_text in (("contract", "merge parallel edges"), ("focklift", "lifted Fock functor")):
        op(name, help_text).add_argument("triskell")
    op("fock", "relational Fock functor (minors)").add_argument("relation")
    p = op("focksym", "symmetric Fock functor")
    p.add_argument("triskell")
    p.add_argument("--degree", type=int, default=None, help="Multiset degree bound")
    for name in ("detm", "trm"):
        p = op(name, "m-determinant" if name == "detm" else "m-trace")
        p.add_argument("triskell")
        p.add_argument("--measure", default="identity", choices=["identity", "abs"])
    p = op("interpret", "interpret an MLL proof")
    p.add_argument("proof")
    p.add_argument("--model", choices=["ig", "wr"], default="ig")
    p.add_argument("--atoms", required=True, help="Atom assignment JSON")
    op("normalize", "cut elimination").add_argument("proof")
    ev.set_defaults(handler=cmd_eval)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    verbose = args.verbose or settings().verbose
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except (TriskellError, OSError) as exc:
        logger.debug("command failed", exc_info=True)
        print(json.dumps({"success": False, "error": str(exc)}), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
