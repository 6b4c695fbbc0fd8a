"""Command-line entry point for the Shapley attribution engine."""
import argparse
import sys
from pathlib import Path
from typing import List, Optional

from src.commands import cmd_attribute, cmd_bench, cmd_compare, cmd_synth, cmd_validate
from src.schemas.run_config import EmitFormat, FilterMode, InputFormat, Kpi, Method, TimeBucket
from src.services.benchmark import ENGINES
from src.services.error_handling import configure_logging


def _choices(enum: type) -> List[str]:
    return [member.value for member in enum]


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    """Flags shared by the commands that read journeys. Defaults stay None so config files apply."""
    parser.add_argument("--config", type=Path, help="JSON run config; flags override it")
    parser.add_argument("--input", type=Path, action="append", help="Journey source (repeatable)")
    parser.add_argument("--format", choices=_choices(InputFormat), help="Input format")
    parser.add_argument("--group-map", type=Path, help="channel,group CSV")
    parser.add_argument("--min-distinct", type=int, help="Drop journeys with fewer distinct channels")
    parser.add_argument("--filter-mode", choices=_choices(FilterMode))
    parser.add_argument("--kpi", choices=_choices(Kpi))
    parser.add_argument("--keep-zero", action="store_true", default=None, help="Keep zero-value journeys")
    parser.add_argument("--output", type=Path, help="Output file; stdout when absent")
    parser.add_argument("--emit", choices=_choices(EmitFormat))
    parser.add_argument("--threads", type=int, help="Worker threads for parsing and aggregation")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shapley-attribution",
        description="Shapley-value multi-touch attribution over converted user journeys",
    )
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--log-json", action="store_true", default=None, help="JSON log lines on stderr")
    sub = parser.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("attribute", help="Attribute campaign value to channels")
    _add_pipeline_flags(s)
    s.add_argument("--method", choices=_choices(Method))
    s.add_argument("--time-bucket", choices=_choices(TimeBucket), help="Slot width for --method timed")
    s.add_argument("--percent", action=argparse.BooleanOptionalAction, default=None)
    s.add_argument("--precision", type=int, help="Decimal places in the report")
    s.add_argument("--dump-coalitions", type=Path, help="Write R(S) as CSV to this path")
    s.set_defaults(func=cmd_attribute)

    s = sub.add_parser("compare", help="Naive engine against the simplified engine")
    _add_pipeline_flags(s)
    s.add_argument("--baseline", action="store_true", default=None, help="Add rule-based baselines")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("validate", help="Audit the attribution invariants on a dataset")
    _add_pipeline_flags(s)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("synth", help="Generate synthetic journeys from a campaign spec")
    s.add_argument("--spec", type=Path, required=True, help="Campaign spec JSON")
    s.add_argument("--output", type=Path, help="journey-jsonl file; stdout when absent")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("bench", help="Time the engines on a synthetic campaign")
    s.add_argument("--spec", type=Path, help="Campaign spec JSON; overrides the sizing flags")
    s.add_argument("--channels", type=int, default=16)
    s.add_argument("--journeys", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--engine", action="append", choices=list(ENGINES), help="Engine to time (repeatable)")
    s.add_argument("--direct-max-channels", type=int, help="Largest p for the direct-sum naive engine")
    s.add_argument("--threads", type=int)
    s.add_argument("--output", type=Path)
    s.add_argument("--emit", choices=_choices(EmitFormat))
    s.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    if args.log_level or args.log_json:
        configure_logging(args.log_level, args.log_json)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
