"""
eddeg command-line entry point
ED degree bounds by mixed volume, numeric critical-point counts and their comparison
"""

import argparse
import asyncio
import logging
import sys

from command_handler import command_handler
from constants import ALGORITHMS, EXIT_CODES
from logger import logger


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit 1; exit code 2 belongs to COUNT_BELOW_BOUND"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CODES["ERROR"], f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="eddeg", description=__doc__.strip().splitlines()[1])
    parser.add_argument("--config", help="settings file (default eddeg.json)")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    subparsers = parser.add_subparsers(dest="command", required=True)

    bound = subparsers.add_parser("bound", help="mixed-volume bound on the ED degree")
    bound.add_argument("file")
    bound.add_argument("--algorithm", choices=ALGORITHMS)
    bound.add_argument("--seed", type=int)
    bound.add_argument("--json", action="store_true")

    count = subparsers.add_parser("count", help="numeric count of ED critical points")
    count.add_argument("file")
    count.add_argument("--seed", type=int)
    count.add_argument("--tol", type=float, help="residual tolerance for converged endpoints")
    count.add_argument("--json", action="store_true")

    verify = subparsers.add_parser("verify", help="compare the bound with the numeric count")
    verify.add_argument("file")
    verify.add_argument("--seed", type=int)
    verify.add_argument("--algorithm", choices=ALGORITHMS)
    verify.add_argument("--out", help="also write the JSON report to this path")
    verify.add_argument("--json", action="store_true")

    faces = subparsers.add_parser("faces", help="face functions of the Lagrange system under w")
    faces.add_argument("file")
    faces.add_argument("--w", required=True, help="w1,..,wn,v1,..,vm")
    faces.add_argument("--seed", type=int)

    polytopes = subparsers.add_parser("polytopes", help="vertex tables of the Newton polytopes")
    polytopes.add_argument("file")
    polytopes.add_argument("--json", action="store_true")
    return parser


async def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logger.set_console_level(logging.DEBUG)
    try:
        return await command_handler.execute(args)
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return EXIT_CODES["ERROR"]
    except Exception as e:
        logger.critical(f"Unexpected failure in {args.command}: {e}", exc_info=True)
        return EXIT_CODES["ERROR"]


if __name__ == "__main__":
    sys.exit(asyncio.run(main()))
