"""``netauction`` command line.

Exit codes: 0 success, 1 unreadable input or bad flags, 2 network failed
validation, 3 a mechanism expected to be truthful on this network was not
(or ``--expect-violation`` was given and nothing was found).
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

from .mechanisms import MECHANISMS, MechanismOutcome, canonical_name, get_mechanism
from .network import (
    EconomicNetwork,
    NetworkFormatError,
    dumps_network,
    load_network,
    truthful_profile,
    validate_network,
)
from .numbers import format_rational, to_rational
from .verification.fixtures import all_fixtures
from .verification.generator import GeneratorConfig, generate_network
from .verification.harness import compare_revenues, verification_json, verify_network

EXIT_OK, EXIT_PARSE, EXIT_INVALID, EXIT_VIOLATION = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _rational(text: str) -> Fraction:
    try:
        return to_rational(text)
    except (TypeError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _mechanism(text: str) -> str:
    try:
        return canonical_name(text)
    except KeyError as exc:
        raise argparse.ArgumentTypeError(exc.args[0]) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="netauction", description="Auctions over economic networks with transaction costs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def output_opts(p, formats=True):
        p.add_argument("--output", help="write here instead of standard output")
        if formats:
            p.add_argument("--format", choices=("json", "table"), default="json")

    run = sub.add_parser("run", help="run one mechanism on the truthful profile")
    run.add_argument("--network", required=True)
    run.add_argument("--mechanism", type=_mechanism, default="csm", help="|".join(MECHANISMS))
    output_opts(run)

    verify = sub.add_parser("verify", help="brute-force incentive checks")
    verify.add_argument("--network", required=True)
    verify.add_argument("--mechanism", type=_mechanism, default="csm")
    verify.add_argument("--bid-grid-resolution", type=_rational, default=Fraction(1, 2))
    verify.add_argument("--expect-violation", action="store_true",
                        help="succeed only if some violation is found")
    output_opts(verify, formats=False)

    compare = sub.add_parser("compare", help="revenue of every mechanism")
    compare.add_argument("--network", required=True)
    output_opts(compare)

    gen = sub.add_parser("gen", help="generate a random network")
    gen.add_argument("--buyers", type=int, default=4)
    gen.add_argument("--intermediaries", type=int, default=3)
    gen.add_argument("--edge-prob", type=_rational, default=Fraction(1, 2))
    gen.add_argument("--max-bid", type=_rational, default=Fraction(20))
    gen.add_argument("--max-cost", type=_rational, default=Fraction(5))
    gen.add_argument("--tree", action="store_true")
    gen.add_argument("--seed", type=int, default=0)
    output_opts(gen, formats=False)

    fixtures = sub.add_parser("fixtures", help="write the built-in example networks")
    fixtures.add_argument("--output", help="directory for <name>.json files; omit to print them")
    return parser


def _load(path: str) -> EconomicNetwork:
    try:
        net = load_network(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_PARSE) from None
    except NetworkFormatError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE) from None
    problems = validate_network(net)
    if problems:
        raise CliError("\n".join(f"{path}: {p}" for p in problems), EXIT_INVALID)
    return net


def _emit(text: str, output: Optional[str]) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _table(rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows)


def outcome_table(outcome: MechanismOutcome) -> str:
    head = [
        f"mechanism  {outcome.mechanism}",
        f"winner     {outcome.winner or '-'}",
        f"chain      {' -> '.join(outcome.chain.path) if outcome.chain else '-'}",
        f"revenue    {format_rational(outcome.revenue)}",
        f"welfare    {format_rational(outcome.welfare)}",
        "",
    ]
    rows = [("agent", "allocation", "payment")]
    rows += [(a, str(outcome.allocation[a]), format_rational(outcome.payments[a])) for a in outcome.payments]
    return "\n".join(head) + "\n" + _table(rows)


def cmd_run(args) -> int:
    net = _load(args.network)
    outcome = get_mechanism(args.mechanism)(net, truthful_profile(net))
    _emit(outcome.to_json() if args.format == "json" else outcome_table(outcome), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    net = _load(args.network)
    result = verify_network(net, args.mechanism, args.bid_grid_resolution)
    _emit(verification_json([result]), args.output)
    found = result.violation_count > 0
    if args.expect_violation:
        return EXIT_OK if found else EXIT_VIOLATION
    claimed = result.mechanism == "csm" or (result.mechanism == "idm-tc" and net.is_tree())
    return EXIT_VIOLATION if claimed and found else EXIT_OK


def cmd_compare(args) -> int:
    net = _load(args.network)
    revenues = compare_revenues(net, check=False)
    if args.format == "json":
        _emit(json.dumps({k: format_rational(v) for k, v in revenues.items()}), args.output)
    else:
        _emit(_table([("mechanism", "revenue")] + [(k, format_rational(v)) for k, v in revenues.items()]),
              args.output)
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        config = GeneratorConfig(
            n_buyers=args.buyers,
            n_intermediaries=args.intermediaries,
            edge_probability=args.edge_prob,
            max_bid=args.max_bid,
            max_cost=args.max_cost,
            tree_mode=args.tree,
            seed=args.seed,
        )
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None
    _emit(dumps_network(generate_network(config)), args.output)
    return EXIT_OK


def cmd_fixtures(args) -> int:
    fixtures = all_fixtures()
    if args.output:
        folder = Path(args.output)
        folder.mkdir(parents=True, exist_ok=True)
        for name, net in fixtures.items():
            (folder / f"{name}.json").write_text(dumps_network(net), encoding="utf-8")
    else:
        merged = {name: json.loads(dumps_network(net)) for name, net in fixtures.items()}
        _emit(json.dumps(merged, indent=2), None)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "verify": cmd_verify,
    "compare": cmd_compare,
    "gen": cmd_gen,
    "fixtures": cmd_fixtures,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(exc, file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
