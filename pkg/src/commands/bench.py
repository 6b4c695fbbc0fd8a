"""``bench``: time the engines on a synthetic campaign."""
import argparse
from pathlib import Path

from src.schemas.campaign import CampaignSpec
from src.schemas.run_config import EmitFormat
from src.services.benchmark import ENGINES, run_benchmark
from src.services.error_handling import error_handler
from src.services.reporting import emit_benchmark
from src.services.synth import load_campaign_spec

from .pipeline import write_output

# journey lengths 1..6 when no spec file is given
DEFAULT_LENGTH_WEIGHTS = [0.35, 0.25, 0.15, 0.1, 0.1, 0.05]


def campaign_from_args(args: argparse.Namespace) -> CampaignSpec:
    if args.spec:
        return load_campaign_spec(args.spec)
    return CampaignSpec(
        p=args.channels,
        journeys=args.journeys,
        length_weights=DEFAULT_LENGTH_WEIGHTS,
        seed=args.seed,
    )


@error_handler()
def cmd_bench(args: argparse.Namespace) -> int:
    spec = campaign_from_args(args)
    report = run_benchmark(
        spec,
        engines=args.engine or ENGINES,
        threads=args.threads or 1,
        direct_max_channels=args.direct_max_channels,
    )
    output = Path(args.output) if args.output else None
    write_output(emit_benchmark(report, args.emit or EmitFormat.TEXT), output)
    return 0
