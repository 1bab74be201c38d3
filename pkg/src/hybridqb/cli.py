"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 numerical-invariant violation or failed
audit, 3 I/O error. Diagnostics go to stderr; data goes to ``--out`` or stdout.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from . import __version__
from .errors import HybridQBError, InvariantViolation, RunError, UnknownPreset
from .scenario import (
    PRESET_NAMES,
    discrepancy_report,
    load_config,
    preset,
    random_grid,
    run,
    scenario_from_mapping,
    scenario_report,
    write,
    write_report,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# flag name -> Scenario mapping key
_PARAM_FLAGS = {
    "J": "J", "Delta": "Delta", "D": "D", "g1": "g1", "g2": "g2", "B": "B", "mu-B": "mu_B",
    "Omega": "Omega", "theta": "theta", "T": "T", "t-max": "t_max", "n-steps": "n_steps",
}


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=PRESET_NAMES)
    p.add_argument("--config", metavar="PATH", help="flat key = value scenario file")
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--mode", choices=("charger-only", "total"))
    p.add_argument("--backend", choices=("numeric", "closed-form"))
    p.add_argument("--coherence-basis", choices=("computational", "eigen"))
    p.add_argument("--power-method", choices=("central", "analytic"))
    p.add_argument("--report", metavar="PATH", help="also write the closed-form vs numeric discrepancy report")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--sweep-param")
    p.add_argument("--sweep-values", metavar="V1,V2,...")
    for flag, key in _PARAM_FLAGS.items():
        p.add_argument(f"--{flag}", dest=key, metavar="VALUE")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hybridqb", description="Qubit-qutrit Heisenberg-dimer quantum battery simulator.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    for name, help_text in (
        ("simulate", "run one scenario (preset, config file and/or flags)"),
        ("sweep", "run a scenario that must carry a sweep axis"),
    ):
        _add_scenario_flags(sub.add_parser(name, help=help_text))

    p = sub.add_parser("preset", help="run a named preset")
    p.add_argument("name", choices=PRESET_NAMES)
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--report", metavar="PATH")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("audit", help="compare closed-form and numeric backends on a parameter grid")
    p.add_argument("--grid", default="random:100", metavar="random:N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out", metavar="PATH")

    sub.add_parser("version", help="print the version")
    return parser


def _scenario_from_args(args):
    values = {}
    if args.config:
        values.update(load_config(args.config))
    if args.preset:
        values["preset"] = args.preset
    for key in list(_PARAM_FLAGS.values()) + ["mode", "backend", "coherence_basis", "power_method",
                                               "sweep_param", "sweep_values"]:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return scenario_from_mapping(values)


def _parse_grid(grid: str, seed: int):
    kind, _, arg = grid.partition(":")
    if kind != "random" or not arg.isdigit() or int(arg) < 1:
        raise UsageError(f"unsupported grid {grid!r}; expected random:N")
    return random_grid(int(arg), seed)


def _execute(args) -> int:
    if args.command == "version":
        print(__version__)
        return EXIT_OK

    if args.command == "audit":
        report = discrepancy_report(_parse_grid(args.grid, args.seed), tol=args.tol)
        report["grid"] = args.grid
        report["seed"] = args.seed
        write_report(report, args.out)
        if not report["closed_form_agrees"]:
            print("audit: closed-form and numeric thermal states disagree", file=sys.stderr)
            return EXIT_NUMERIC
        return EXIT_OK

    s = preset(args.name) if args.command == "preset" else _scenario_from_args(args)
    if args.command == "sweep" and s.sweep is None:
        raise UsageError("sweep needs --sweep-param/--sweep-values, a sweeping preset or a config with a sweep")
    table = run(s, workers=max(1, args.workers))
    write(table, args.format, args.out)
    if args.report:
        write_report(scenario_report(s), args.report)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        return _execute(args)
    except (UsageError, UnknownPreset) as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (RunError, InvariantViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, HybridQBError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
