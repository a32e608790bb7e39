# Command-line entry point
import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from evsense.cli.commands import detect, evaluate, gen_scene, represent, report, simulate, sweep
from evsense.cli.common import EXIT_INVALID, global_options
from evsense.exceptions import EvsenseError
from evsense.logging_config import configure_logging
from evsense.models.run_config import RunConfig

logger = logging.getLogger(__name__)

COMMANDS = [gen_scene, simulate, represent, detect, evaluate, sweep, report]
DETECTOR_OPTIONS = ("density_threshold", "min_area", "dilation_radius", "merge_gap_ratio")


def build_parser() -> argparse.ArgumentParser:
    common = global_options()
    parser = argparse.ArgumentParser(
        prog="evsense",
        allow_abbrev=False,
        description="Event-camera sensor configuration benchmark",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[common],
        epilog="""
Examples:
  Render a random scene:
    evsense gen-scene --random-scene --seed 3 --out scenes/s3

  Transduce it under a registered configuration:
    evsense simulate --frames scenes/s3 --config e1 --out runs/s3_e1

  Sweep a test partition over several scenes:
    evsense sweep --partition test2 --scenes scenes/s1 scenes/s2 scenes/s3 --out runs/test2

  Reproduce the published score aggregates:
    evsense report --published all --out runs/published

Log level: EVSENSE_LOG=error|warn|info|debug (default: warn)
        """,
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    for command in COMMANDS:
        command.register(subparsers, [common])
    return parser


def collect_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "handler", "config_file")}
    detector = {k: overrides.pop(k) for k in DETECTOR_OPTIONS if k in overrides}
    if detector:
        overrides["detector"] = detector
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging()

    try:
        run_config = RunConfig.resolve(args.command, getattr(args, "config_file", None), collect_overrides(args))
        return args.handler(run_config)
    except (EvsenseError, ValidationError, FileNotFoundError) as e:
        logger.error(f"{args.command} failed: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
