"""Command line front end.

Subcommands: ``check`` (run one fairness checker), ``solve`` (run an
allocation algorithm), ``generate`` (seeded random instances), ``reduce``
(emit a hardness instance from a 3-partition file), ``taxonomy`` (evaluate
every concept and assert the implications between them).

Exit codes: 0 the checked property holds / success, 1 the property fails
(a witness is emitted), 2 usage or parse error, 3 enumeration bound
exceeded.  Output is machine-readable JSON unless ``--pretty`` is given.
The GEFKIT_BOUND environment variable overrides the default enumeration
guard; an explicit ``--bound`` beats both.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import algorithms, fairness, generators, hardness, welfare
from .core import (
    FormatError,
    GefkitError,
    InvalidAllocationError,
    ProfileError,
    SearchBoundExceeded,
    load_allocation,
    load_instance,
    rational,
    rational_str,
    save_allocation,
    save_instance,
)

EXIT_OK = 0
EXIT_FAILS = 1
EXIT_USAGE = 2
EXIT_BOUND = 3

ALGORITHMS = ("egal-sequential", "ternary-flow", "leximin-bf", "nash-bf")


def _effective_bound(args) -> int | None:
    if getattr(args, "bound", None) is not None:
        return args.bound
    env = os.environ.get("GEFKIT_BOUND")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise FormatError(f"GEFKIT_BOUND={env!r} is not an integer") from exc
    return None


def _emit(doc, pretty: bool) -> None:
    if pretty:
        print(_render_pretty(doc))
    else:
        print(json.dumps(doc, sort_keys=True))


def _render_pretty(doc, indent: str = "") -> str:
    lines = []
    for key, value in doc.items():
        if isinstance(value, dict):
            lines.append(f"{indent}{key}:")
            lines.append(_render_pretty(value, indent + "  "))
        else:
            lines.append(f"{indent}{key}: {value}")
    return "\n".join(lines)


def _cmd_check(args) -> int:
    instance = load_instance(args.instance)
    allocation = load_allocation(args.allocation)
    report = fairness.check_concept(
        instance, allocation, args.concept, bound=_effective_bound(args)
    )
    _emit(fairness.report_to_dict(report), args.pretty)
    return EXIT_OK if report.holds else EXIT_FAILS


def _cmd_solve(args) -> int:
    instance = load_instance(args.instance)
    bound = _effective_bound(args)
    if args.algorithm == "egal-sequential":
        allocation = algorithms.egal_sequential(instance)
    elif args.algorithm == "ternary-flow":
        allocation = algorithms.ternary_flow(instance)
    elif args.algorithm == "leximin-bf":
        allocation = welfare.leximin_optimal_bruteforce(instance, bound)
    elif args.algorithm == "nash-bf":
        allocation = welfare.nash_optimal_bruteforce(instance, bound)
    else:  # pragma: no cover - argparse rejects other values
        raise ValueError(args.algorithm)
    save_allocation(allocation, args.output)
    utilities = welfare.utility_vector(instance, allocation)
    _emit(
        {
            "algorithm": args.algorithm,
            "output": str(args.output),
            "utilities": [rational_str(u) for u in utilities],
        },
        args.pretty,
    )
    return EXIT_OK


def _cmd_generate(args) -> int:
    lo, hi = (int(v) for v in args.value_range)
    instance = generators.generate_random_instance(
        args.kind, args.agents, args.items, args.seed, (lo, hi)
    )
    save_instance(instance, args.output)
    _emit({"kind": args.kind, "output": str(args.output), "seed": args.seed}, args.pretty)
    return EXIT_OK


def _cmd_reduce(args) -> int:
    with open(args.input, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{args.input}: {exc}") from exc
    try:
        values = doc["x"]
    except (KeyError, TypeError) as exc:
        raise FormatError("3-partition file needs an 'x' list") from exc
    tp = hardness.ThreePartitionInstance.from_values([rational(v) for v in values])
    if args.variant == "goods":
        out = hardness.reduce_to_isgef1_goods(tp)
    else:
        out = hardness.reduce_to_isgef1_chores(tp)
    answer = hardness.solve_3partition_bruteforce(tp) is not None
    prefix = args.output_prefix
    instance_path = f"{prefix}.instance.json"
    allocation_path = f"{prefix}.allocation.json"
    label_path = f"{prefix}.label.json"
    save_instance(out.instance, instance_path)
    save_allocation(out.allocation, allocation_path)
    with open(label_path, "w", encoding="utf-8") as fh:
        fh.write(
            json.dumps(
                {
                    "answer": "yes" if answer else "no",
                    "oracle": "bruteforce-3partition",
                },
                sort_keys=True,
                indent=2,
            )
            + "\n"
        )
    _emit(
        {
            "variant": args.variant,
            "answer": "yes" if answer else "no",
            "instance": instance_path,
            "allocation": allocation_path,
            "label": label_path,
        },
        args.pretty,
    )
    return EXIT_OK


def _cmd_taxonomy(args) -> int:
    instance = load_instance(args.instance)
    allocation = load_allocation(args.allocation)
    results = fairness.taxonomy_report(instance, allocation, bound=_effective_bound(args))
    _emit(results, args.pretty)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gefkit",
        description="Exact group fairness checkers and solvers for indivisible goods and chores.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="check one fairness concept")
    check.add_argument("--instance", required=True)
    check.add_argument("--allocation", required=True)
    check.add_argument("--concept", required=True)
    check.add_argument("--bound", type=int, default=None)
    check.add_argument("--pretty", action="store_true")
    check.set_defaults(func=_cmd_check)

    solve = sub.add_parser("solve", help="compute an allocation")
    solve.add_argument("--instance", required=True)
    solve.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    solve.add_argument("--output", required=True)
    solve.add_argument("--bound", type=int, default=None)
    solve.add_argument("--pretty", action="store_true")
    solve.set_defaults(func=_cmd_solve)

    generate = sub.add_parser("generate", help="write a seeded random instance")
    generate.add_argument("--kind", required=True, choices=generators.KINDS)
    generate.add_argument("--agents", type=int, required=True)
    generate.add_argument("--items", type=int, required=True)
    generate.add_argument("--seed", type=int, required=True)
    generate.add_argument("--value-range", nargs=2, default=("-2", "2"), metavar=("LO", "HI"))
    generate.add_argument("--output", required=True)
    generate.add_argument("--pretty", action="store_true")
    generate.set_defaults(func=_cmd_generate)

    reduce_cmd = sub.add_parser(
        "reduce", help="emit a hardness instance from a 3-partition file"
    )
    reduce_cmd.add_argument("--variant", required=True, choices=("goods", "chores"))
    reduce_cmd.add_argument("--input", required=True)
    reduce_cmd.add_argument("--output-prefix", required=True)
    reduce_cmd.add_argument("--pretty", action="store_true")
    reduce_cmd.set_defaults(func=_cmd_reduce)

    taxonomy = sub.add_parser("taxonomy", help="evaluate every concept")
    taxonomy.add_argument("--instance", required=True)
    taxonomy.add_argument("--allocation", required=True)
    taxonomy.add_argument("--bound", type=int, default=None)
    taxonomy.add_argument("--pretty", action="store_true")
    taxonomy.set_defaults(func=_cmd_taxonomy)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SearchBoundExceeded as exc:
        print(f"gefkit: bound exceeded: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except (
        FormatError,
        ProfileError,
        InvalidAllocationError,
        hardness.ReductionError,
        FileNotFoundError,
        ValueError,
    ) as exc:
        print(f"gefkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GefkitError as exc:
        print(f"gefkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
