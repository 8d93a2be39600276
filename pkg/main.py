#!/usr/bin/env python3
"""
specreg: convergence-rate experiments for spectral regularisation methods
"""
import argparse
import logging
import sys

from core.config import load_config
from core.errors import ConfigError, SpecRegError
from core.runner import MODES, ExperimentRunner
from core.settings import CMD_RUN_ALL, EXIT_FAIL, EXIT_USAGE, TITLE, VERSION
from core.utils import setup_logging
from ui.console import print_summary

logger = logging.getLogger(__name__)

COMMAND_HELP = {
    "validate-filter": "check the generator conditions of a filter family",
    "rate-exact": "error curve for exact data and its fitted rate",
    "rate-noisy": "worst-case brackets over a noise sweep",
    "var-ineq": "variational-inequality constants and source condition witness",
    "distance": "distance-function profile and error bound",
    CMD_RUN_ALL: "run the built-in acceptance suite",
}


def build_parser():
    """Argument parser with one subcommand per experiment"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config JSON (default: settings.json)")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--seed", type=int, help="random seed (overrides the config)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")

    parser = argparse.ArgumentParser(prog=TITLE, description=__doc__.strip())
    parser.add_argument("--version", action="version", version=f"{TITLE} {VERSION}")
    sub = parser.add_subparsers(dest="command", metavar="<subcommand>")
    sub.required = True
    for command in list(MODES) + [CMD_RUN_ALL]:
        sub.add_parser(command, parents=[common], help=COMMAND_HELP[command])
    return parser


def main(argv=None):
    """
    Entry point of the command line

    Args:
        argv (list, optional): Arguments without the program name

    Returns:
        int: 0 pass, 1 criterion failure, 2 usage or config error
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    setup_logging(args.verbose)

    if args.seed is not None and args.seed < 0:
        logger.error("seed must be non-negative")
        return EXIT_USAGE
    try:
        config = load_config(args.config, seed=args.seed, output_dir=args.out)
        result = ExperimentRunner(config).run(args.command)
    except ConfigError as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except SpecRegError as e:
        logger.error("%s: %s", e.kind, e)
        return EXIT_FAIL
    print_summary(result)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
