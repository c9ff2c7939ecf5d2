import logging
import sys
from argparse import ArgumentParser
from typing import Optional, Sequence

from app.cli.commands import cmd_resources, cmd_run, cmd_sweep
from app.core.config import settings

logger = logging.getLogger(__name__)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="timemgr",
        description="Co-simulate software tick vs FPGA hardware RTOS time management.",
    )
    common = ArgumentParser(add_help=False)
    common.add_argument(
        "--seed", type=int, default=None, help="Reserved; the simulator is deterministic."
    )
    verbs = parser.add_subparsers(dest="verb", required=True)

    run = verbs.add_parser("run", parents=[common], help="Simulate one scenario, write trace and report CSV.")
    run.add_argument("--scenario", default=None, help="TOML scenario file (default: embedded 12-task scenario).")
    run.add_argument("--out", required=True, help="Output directory.")
    run.add_argument(
        "--mode", choices=["software", "hardware", "both"], default=None, help="Override the scenario mode."
    )

    sweep = verbs.add_parser("sweep", parents=[common], help="Latency and improvement-factor tables over a task-count range.")
    sweep.add_argument("--scenario", default=None, help="TOML scenario file.")
    sweep.add_argument("--tasks", required=True, help="Task-count range, e.g. 1..12.")
    sweep.add_argument("--out", required=True, help="Output directory.")

    resources = verbs.add_parser("resources", parents=[common], help="FPGA resource estimate per task count.")
    resources.add_argument("--tasks", required=True, help="Task-count range, e.g. 1..12.")
    resources.add_argument("--width", type=int, default=settings.COUNTER_WIDTH_BITS, help="Counter width in bits.")
    resources.add_argument("--out", default=None, help="Output CSV file (default: stdout).")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        level=settings.LOG_LEVEL,
        format='%(asctime)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)
    if args.seed is not None:
        logger.debug(f"--seed {args.seed} ignored: runs are deterministic")

    if args.verb == "run":
        return cmd_run(args.scenario, args.out, args.mode)
    if args.verb == "sweep":
        return cmd_sweep(args.scenario, args.tasks, args.out)
    return cmd_resources(args.tasks, args.width, args.out)


if __name__ == "__main__":
    sys.exit(main())
