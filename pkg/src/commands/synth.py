"""``synth``: campaign spec in, journey-jsonl out."""
import argparse
from pathlib import Path

from src.services.error_handling import StructuredLogger, error_handler
from src.services.ingestion import serialize_journeys
from src.services.synth import generate, load_campaign_spec

from .pipeline import write_output

logger = StructuredLogger(__name__)


@error_handler()
def cmd_synth(args: argparse.Namespace) -> int:
    spec = load_campaign_spec(args.spec)
    store = generate(spec)
    output = Path(args.output) if args.output else None
    write_output(serialize_journeys(store).encode("utf-8"), output)
    logger.info("Wrote synthetic journeys", extra={"journeys": len(store), "output": str(output or "-")})
    return 0
