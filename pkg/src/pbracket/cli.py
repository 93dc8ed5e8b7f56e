"""Command-line interface.

Exit status is 0 on success, 1 on a user error (bad arguments, missing
file, invalid model, unresolvable or ill-posed query) with the message on
stderr, and 2 when ``verify`` finds a failing invariant.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .ctmc import ctmc_stationary, evolve_density
from .dsl import evaluate, load_model
from .dtmc import evolve_left, stationary
from .errors import PBracketError
from .invariants import verify_model
from .processes import sample_path

EXIT_OK = 0
EXIT_USER = 1
EXIT_VERIFY = 2

DIGITS = 13


class UserError(Exception):
    """Problem with the command line itself."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USER, f"{self.prog}: error: {message}\n")


def fmt(value: float) -> str:
    """Numbers as printed by every subcommand."""
    return f"{value:.{DIGITS}g}"


def parse_times(spec: str) -> list[float]:
    """``"0.5,1,2"`` lists times; ``"start:stop:num"`` spaces ``num`` of them evenly."""
    try:
        if ":" in spec:
            parts = spec.split(":")
            if len(parts) != 3:
                raise ValueError
            start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
            if num < 1:
                raise ValueError
            return np.linspace(start, stop, num).tolist()
        return [float(t) for t in spec.split(",") if t.strip()]
    except ValueError:
        raise UserError(f"bad --times {spec!r}; use a comma list or start:stop:num") from None


def parse_binding(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    try:
        if not sep or not name.strip():
            raise ValueError
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}") from None


def _dynamics(model, name: str):
    if name in model.chains:
        return "chain"
    if name in model.generators:
        return "generator"
    known = sorted([*model.chains, *model.generators])
    raise UserError(f"no chain or generator named {name!r}" + (f"; declared: {', '.join(known)}" if known else ""))


def _print_vector(states, weights, out):
    width = max(len(str(s)) for s in states)
    for s, w in zip(states, weights):
        print(f"{str(s).ljust(width)}  {fmt(w)}", file=out)


def cmd_eval(args, out):
    model = load_model(args.model)
    print(fmt(evaluate(args.expr, model, dict(args.bind or []))), file=out)


def cmd_evolve(args, out):
    model = load_model(args.model)
    kind = _dynamics(model, args.chain)
    if kind == "chain":
        steps = args.steps
        if steps is None:
            if args.time != int(args.time):
                raise UserError(f"chain {args.chain!r} moves in whole steps; got --time {args.time}")
            steps = int(args.time)
        v = evolve_left(model.chain_initial[args.chain], model.chains[args.chain], steps)
    else:
        t = float(args.steps) if args.time is None else args.time
        v = evolve_density(model.generator_initial[args.chain], model.generators[args.chain], t)
    _print_vector(v.states, v.weights, out)


def cmd_stationary(args, out):
    model = load_model(args.model)
    if _dynamics(model, args.chain) == "chain":
        v = stationary(model.chains[args.chain])
    else:
        v = ctmc_stationary(model.generators[args.chain])
    _print_vector(v.states, v.weights, out)


def cmd_simulate(args, out):
    model = load_model(args.model)
    if args.process not in model.processes:
        known = sorted(model.processes)
        raise UserError(f"no process named {args.process!r}" + (f"; declared: {', '.join(known)}" if known else ""))
    times = parse_times(args.times)
    out.write(sample_path(model.processes[args.process], times, args.seed).to_csv(DIGITS))


def cmd_verify(args, out):
    model = load_model(args.model)
    results = verify_model(model)
    for r in results:
        print(r.line(), file=out)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} invariants hold", file=out)
    if failed:
        print("failed invariants:", file=sys.stderr)
        for r in failed:
            print(f"  {r.name}: {r.detail}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_info(args, out):
    model = load_model(args.model)
    print(model.summary(), file=out)
    for name, p in model.chains.items():
        print(f"\ntransition matrix of {name}:", file=out)
        print(p.format(DIGITS), file=out)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pbracket", description="Evaluate probability brackets on model files.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("eval", help="evaluate a bracket expression")
    s.add_argument("model")
    s.add_argument("expr")
    s.add_argument("--bind", action="append", type=parse_binding, metavar="NAME=VALUE",
                   help="numeric constant usable inside observable expressions")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("evolve", help="distribution of a chain or generator after some time")
    s.add_argument("model")
    s.add_argument("--chain", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--steps", type=int)
    g.add_argument("--time", type=float)
    s.set_defaults(func=cmd_evolve)

    s = sub.add_parser("stationary", help="stationary distribution of a chain or generator")
    s.add_argument("model")
    s.add_argument("--chain", required=True)
    s.set_defaults(func=cmd_stationary)

    s = sub.add_parser("simulate", help="one seeded sample path as CSV")
    s.add_argument("model")
    s.add_argument("--process", required=True)
    s.add_argument("--times", required=True, help="comma list, or start:stop:num")
    s.add_argument("--seed", type=int, required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("verify", help="run every applicable invariant check")
    s.add_argument("model")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("info", help="summarize a model")
    s.add_argument("model")
    s.set_defaults(func=cmd_info)
    return p


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        status = args.func(args, out)
    except FileNotFoundError as exc:
        print(f"pbracket: file not found: {exc.filename or exc}", file=sys.stderr)
        return EXIT_USER
    except (PBracketError, UserError, ArithmeticError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"pbracket: error: {msg}", file=sys.stderr)
        return EXIT_USER
    return EXIT_OK if status is None else status
