"""Command-line surface.

Exit codes are uniform across subcommands: 0 for an affirmative result
(valid, no-signalling, local, found, composed), 1 for a negative one
(signalling, nonlocal, exhausted, obstructed, invalid wiring), 2 for usage
errors, malformed files, and exceeded budgets.  Every command is a pure
function of its file inputs and flags; ``--report`` writes a
machine-readable document that is byte-identical across identical
invocations.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .analysis import (
    OBSTRUCTED,
    dyadic_obstruction,
    obstruction_to_jsonable,
    profile_to_jsonable,
    denominator_primes_of,
    witness_unsimulable_prime,
)
from .boxes import InvalidBoxError, modp_nlb, read_box, signalling_witness, write_box, box_to_jsonable
from .locality import game_value, is_local, read_game
from .rational import format_rational
from .search import (
    DEFAULT_SEARCH_BUDGET,
    EngineNotApplicable,
    FOUND,
    SearchBudgetExceeded,
    best_success,
    search_perfect,
)
from .wiring import InvalidWiringError, crt_wiring, evaluate_wiring, read_wiring, wiring_to_jsonable, write_wiring

EXIT_YES = 0
EXIT_NO = 1
EXIT_ERROR = 2


def _emit(args, payload: dict, lines) -> None:
    for line in lines:
        print(line)
    report_path = getattr(args, "report", None)
    if report_path:
        doc = dict(payload)
        doc["tool"] = f"nlbox {__version__}"
        doc["invocation"] = list(getattr(args, "_invocation", sys.argv[1:]))
        Path(report_path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _cmd_gen_modp(args) -> int:
    try:
        box = modp_nlb(args.p)
    except InvalidBoxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    write_box(box, args.out)
    _emit(args, {"command": "gen modp", "p": args.p, "out": str(args.out)},
          [f"nlbox {__version__}: wrote mod-{args.p} box to {args.out}"])
    return EXIT_YES


def _cmd_check(args) -> int:
    try:
        box = read_box(args.box)
    except InvalidBoxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.what == "ns":
        witness = signalling_witness(box)
        if witness is None:
            _emit(args, {"command": "check ns", "verdict": "no-signalling"},
                  [f"{args.box}: no-signalling"])
            return EXIT_YES
        _emit(
            args,
            {
                "command": "check ns",
                "verdict": "signalling",
                "witness": {
                    "side": witness.side,
                    "own_input": witness.own_input,
                    "other_inputs": [witness.other_first, witness.other_second],
                    "output": witness.output,
                },
            },
            [
                f"{args.box}: signalling",
                f"  {witness.side} at input {witness.own_input}: output {witness.output} "
                f"has different probability for the other party's inputs "
                f"{witness.other_first} and {witness.other_second}",
            ],
        )
        return EXIT_NO
    certificate = is_local(box, cap=args.cap)
    if certificate.local:
        lines = [f"{args.box}: local"]
        lines += [f"  vertex {j}: weight {format_rational(w)}" for j, w in certificate.weights]
        _emit(args, {
            "command": "check local",
            "verdict": "local",
            "weights": [[j, format_rational(w)] for j, w in certificate.weights],
        }, lines)
        return EXIT_YES
    bell = certificate.bell
    s = box.shape
    lines = [f"{args.box}: nonlocal"]
    lines.append(f"  separating game: local bound {format_rational(bell.local_bound)}, "
                 f"box achieves {format_rational(bell.achieved)}")
    for x in range(s.x_size):
        for y in range(s.y_size):
            for a in range(s.a_size):
                for b in range(s.b_size):
                    coeff = bell.game.payoff[x][y][a][b]
                    if coeff != 0:
                        lines.append(f"    payoff[x={x} y={y} a={a} b={b}] = {format_rational(coeff)}")
    _emit(args, {
        "command": "check local",
        "verdict": "nonlocal",
        "local_bound": format_rational(bell.local_bound),
        "achieved": format_rational(bell.achieved),
        "payoff": [
            [x, y, a, b, format_rational(bell.game.payoff[x][y][a][b])]
            for x in range(s.x_size) for y in range(s.y_size)
            for a in range(s.a_size) for b in range(s.b_size)
            if bell.game.payoff[x][y][a][b] != 0
        ],
    }, lines)
    return EXIT_NO


def _cmd_game(args) -> int:
    try:
        box = read_box(args.box)
        game = read_game(args.game)
        value = game_value(box, game)
    except (InvalidBoxError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    _emit(args, {"command": "game", "value": format_rational(value)},
          [f"game value: {format_rational(value)}"])
    return EXIT_YES


def _cmd_wire_eval(args) -> int:
    try:
        wiring = read_wiring(args.wiring)
        box = evaluate_wiring(wiring)
    except InvalidWiringError as exc:
        print(f"invalid wiring: {exc}", file=sys.stderr)
        return EXIT_NO
    except InvalidBoxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.out:
        write_box(box, args.out)
    _emit(args, {"command": "wire-eval", "box": box_to_jsonable(box)},
          [f"evaluated wiring over {len(wiring.resources)} resource(s)"
           + (f"; box written to {args.out}" if args.out else "")])
    return EXIT_YES


def _cmd_compose_crt(args) -> int:
    try:
        wiring = crt_wiring(args.p, args.q)
    except InvalidWiringError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    box = evaluate_wiring(wiring)
    write_box(box, args.out)
    if args.wiring_out:
        write_wiring(wiring, args.wiring_out)
    _emit(args, {"command": "compose crt", "p": args.p, "q": args.q, "out": str(args.out)},
          [f"composed mod-{args.p} and mod-{args.q} into mod-{args.p * args.q}; box written to {args.out}"])
    return EXIT_YES


def _search_payload(result) -> dict:
    payload = {
        "outcome": result.outcome,
        "strategies_examined": result.strategies_examined,
        "best_value": format_rational(result.best_value),
        "engine": result.engine,
    }
    if result.witness is not None:
        payload["witness"] = wiring_to_jsonable(result.witness)
    if result.best_witness is not None:
        payload["best_witness"] = wiring_to_jsonable(result.best_witness)
    return payload


def _cmd_search(args) -> int:
    try:
        target = read_box(args.target)
        resources = [read_box(path) for path in args.resource]
    except InvalidBoxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        result = search_perfect(
            target, resources,
            engine=args.engine, budget=args.budget, workers=args.workers,
        )
    except SearchBudgetExceeded as exc:
        print(f"refused: {exc} (estimate {exc.estimate}, budget {exc.budget})", file=sys.stderr)
        return EXIT_ERROR
    except EngineNotApplicable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    lines = [
        f"outcome: {result.outcome}",
        f"strategies examined: {result.strategies_examined}",
        f"best value on target support: {format_rational(result.best_value)}",
    ]
    if result.outcome == FOUND:
        if args.out:
            write_wiring(result.witness, args.out)
            lines.append(f"witness wiring written to {args.out}")
        _emit(args, {"command": "search", **_search_payload(result)}, lines)
        return EXIT_YES
    _emit(args, {"command": "search", **_search_payload(result)}, lines)
    return EXIT_NO


def _cmd_witness_prime(args) -> int:
    try:
        resources = [read_box(path) for path in args.resource]
        witness, report = witness_unsimulable_prime(resources)
        profile = denominator_primes_of(resources)
    except InvalidBoxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    lines = [f"unsimulable prime: {witness}"]
    lines += [f"  {step}" for step in report.derivation]
    _emit(args, {
        "command": "witness-prime",
        "prime": witness,
        "profile": profile_to_jsonable(profile),
        "obstruction": obstruction_to_jsonable(report),
    }, lines)
    return EXIT_NO


def _cmd_obstruct(args) -> int:
    try:
        report = dyadic_obstruction(args.p, args.n)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    lines = [f"dyadic obstruction for p={args.p}, n={args.n}: {report.verdict}"]
    lines += [f"  {step}" for step in report.derivation]
    _emit(args, {"command": "obstruct", "obstruction": obstruction_to_jsonable(report)}, lines)
    return EXIT_NO if report.verdict == OBSTRUCTED else EXIT_YES


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlbox",
        description="Exact tools for no-signalling boxes, wirings, and impossibility checks.",
    )
    parser.add_argument("--version", action="version", version=f"nlbox {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate boxes")
    gen_sub = gen.add_subparsers(dest="kind", required=True)
    gen_modp = gen_sub.add_parser("modp", help="the mod-p nonlocal box")
    gen_modp.add_argument("--p", type=int, required=True, help="modulus, at least 2")
    gen_modp.add_argument("--out", required=True, help="output box file")
    gen_modp.add_argument("--report", help="write a machine-readable report here")
    gen_modp.set_defaults(func=_cmd_gen_modp)

    check = sub.add_parser("check", help="no-signalling and locality checks")
    check_sub = check.add_subparsers(dest="what", required=True)
    for what, help_text in (("ns", "no-signalling check"), ("local", "local-polytope membership")):
        c = check_sub.add_parser(what, help=help_text)
        c.add_argument("--box", required=True, help="box file to check")
        if what == "local":
            c.add_argument("--cap", type=int, default=10**6, help="deterministic-vertex cap")
        c.add_argument("--report", help="write a machine-readable report here")
        c.set_defaults(func=_cmd_check, what=what)

    game = sub.add_parser("game", help="exact game value of a box")
    game.add_argument("--box", required=True)
    game.add_argument("--game", required=True)
    game.add_argument("--report", help="write a machine-readable report here")
    game.set_defaults(func=_cmd_game)

    wire = sub.add_parser("wire-eval", help="evaluate a wiring file to a box")
    wire.add_argument("--wiring", required=True)
    wire.add_argument("--out", help="write the evaluated box here")
    wire.add_argument("--report", help="write a machine-readable report here")
    wire.set_defaults(func=_cmd_wire_eval)

    compose = sub.add_parser("compose", help="compose resource boxes")
    compose_sub = compose.add_subparsers(dest="kind", required=True)
    crt = compose_sub.add_parser("crt", help="mod-p and mod-q into mod-pq (coprime)")
    crt.add_argument("--p", type=int, required=True)
    crt.add_argument("--q", type=int, required=True)
    crt.add_argument("--out", required=True, help="write the composed box here")
    crt.add_argument("--wiring-out", help="also write the composing wiring here")
    crt.add_argument("--report", help="write a machine-readable report here")
    crt.set_defaults(func=_cmd_compose_crt)

    search = sub.add_parser("search", help="exhaustive search for a perfect simulation")
    search.add_argument("--target", required=True, help="target box file")
    search.add_argument("--resource", action="append", required=True,
                        help="resource box file (repeatable)")
    search.add_argument("--budget", type=int, default=DEFAULT_SEARCH_BUDGET,
                        help="maximum number of checks before refusing")
    search.add_argument("--workers", type=int, default=1, help="parallel workers")
    search.add_argument("--engine", choices=("auto", "pruned", "unpruned"), default="auto")
    search.add_argument("--out", help="write the witness wiring here when found")
    search.add_argument("--report", help="write a machine-readable report here")
    search.set_defaults(func=_cmd_search)

    wp = sub.add_parser("witness-prime", help="smallest mod-p box the resources cannot reach")
    wp.add_argument("--resource", action="append", required=True,
                    help="resource box file (repeatable)")
    wp.add_argument("--report", help="write a machine-readable report here")
    wp.set_defaults(func=_cmd_witness_prime)

    obstruct = sub.add_parser("obstruct", help="dyadic divisibility obstruction")
    obstruct.add_argument("--p", type=int, required=True, help="target modulus")
    obstruct.add_argument("--n", type=int, required=True, help="number of binary resources")
    obstruct.add_argument("--report", help="write a machine-readable report here")
    obstruct.set_defaults(func=_cmd_obstruct)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args._invocation = list(argv) if argv is not None else sys.argv[1:]
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
