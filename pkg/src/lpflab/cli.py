"""Command-line entry point.

Exit codes: 0 success, 2 validation error, 3 resource error, 4 check-suite
failure.
"""

from __future__ import annotations

import argparse
import sys
import time

from pydantic import ValidationError

from .errors import ConstructionFailure, InvalidArgument, PreconditionError, ResourceError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RESOURCE = 3
EXIT_CHECK = 4

CONFIG_COMMANDS = ("ek", "ekpnt", "ep", "friable", "density", "ivic", "dynamics", "identity")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lpflab", description="Largest-prime-factor statistics laboratory.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sieve-build", help="build a smallest-prime-factor table and dump it")
    s.add_argument("--limit", type=int, required=True)
    s.add_argument("--out", required=True)

    for name in CONFIG_COMMANDS + ("run",):
        c = sub.add_parser(name, help=f"run a{'n' if name[0] in 'ei' else ''} {name} experiment"
                           if name != "run" else "run any experiment config")
        c.add_argument("--config", required=True)
        c.add_argument("--out", help="override the output path in the config")

    r = sub.add_parser("rho", help="tabulate the generalized Dickman function")
    r.add_argument("--alpha", type=float, required=True)
    r.add_argument("--umax", type=float, default=20.0)
    r.add_argument("--step", type=float, default=2.0**-10)
    r.add_argument("--out", required=True)

    k = sub.add_parser("check", help="run a self-check suite")
    k.add_argument("--suite", choices=("identities", "oracles"), required=True)
    return p


def _validation_message(exc: ValidationError) -> str:
    lines = ["invalid configuration:"]
    for err in exc.errors():
        loc = ".".join(str(x) for x in err["loc"]) or "(root)"
        lines.append(f"  {loc}: {err['msg']}")
    return "\n".join(lines)


def _cmd_sieve(args) -> int:
    from .sieve import build_factor_table

    t0 = time.perf_counter()
    table = build_factor_table(args.limit)
    table.dump(args.out)
    print(f"spf table for N = {table.limit} written to {args.out} ({time.perf_counter() - t0:.2f} s)")
    return EXIT_OK


def _cmd_rho(args) -> int:
    from .friable import dickman_rho

    grid = dickman_rho(args.alpha, u_max=args.umax, step=args.step)
    grid.to_csv(args.out)
    print(f"rho_{args.alpha:g} on [0, {grid.u_max:g}] with step {grid.step:g} written to {args.out}")
    return EXIT_OK


def _cmd_config(args) -> int:
    from .config import load_config
    from .harness import run_experiment

    cfg = load_config(args.config)
    if args.command != "run" and cfg.kind != args.command:
        raise InvalidArgument(f"config kind {cfg.kind!r} does not match subcommand {args.command!r}")
    if args.out:
        cfg = cfg.model_copy(update={"output": args.out})
    result = run_experiment(cfg)
    print(",".join(result.header))
    for row in result.rows:
        print(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    for f in result.files:
        print(f"wrote {f}", file=sys.stderr)
    return EXIT_OK


def _cmd_check(args) -> int:
    from .checks import run_suite

    t0 = time.perf_counter()
    results = run_suite(args.suite)
    for r in results:
        print(f"{'PASS' if r.ok else 'FAIL'}  {r.name}: {r.detail} [{r.seconds:.2f} s]")
    failed = sum(not r.ok for r in results)
    print(f"{args.suite}: {len(results) - failed}/{len(results)} passed in {time.perf_counter() - t0:.1f} s")
    return EXIT_OK if failed == 0 else EXIT_CHECK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"sieve-build": _cmd_sieve, "rho": _cmd_rho, "check": _cmd_check}
    handler = handlers.get(args.command, _cmd_config)
    try:
        return handler(args)
    except ValidationError as exc:
        print(_validation_message(exc), file=sys.stderr)
        return EXIT_VALIDATION
    except (InvalidArgument, PreconditionError, ConstructionFailure, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ResourceError, MemoryError) as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
