#!/usr/bin/env python3
"""
Bell-test laboratory - Main Entry Point

Command-line interface for CHSH experiments with sign, vector and bivector
hidden-variable models.
"""

import argparse
import logging
import sys

from .common import (
    EXIT_CONTRACT, EXIT_USAGE,
    ContractViolationError, InvalidArgumentError, InvalidInputError, ResourceLimitError,
)


def build_parser():
    """Build the top-level argument parser with every command group"""

    parser = argparse.ArgumentParser(
        prog='bellga',
        description='Bell-test laboratory: CHSH experiments with sign, vector and bivector hidden-variable models.',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  bellga run --model bivector --angles 0,90,45,135 --exact   # S for the bivector model
  bellga run --model vector --samples 100000 --seed 7        # Monte Carlo run
  bellga scan --model vector --resolution 19 --format csv    # E(theta) curve
  bellga audit --grid 50                                     # Sign-extraction audit
  bellga brute --angles 0,90,45,135                          # All 16 deterministic strategies
  bellga compare --pair 0,60                                 # Correlators side by side
  bellga selftest                                            # Invariant suites
  bellga config set run.workers 4                            # Set config value

For more help on a specific command:
  bellga <command> --help
"""
    )
    parser.add_argument(
        '--log-level',
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
        default='WARNING',
        help='Logging level (default: WARNING)'
    )

    subparsers = parser.add_subparsers(dest='command', help='Commands')

    # Config commands
    config_parser = subparsers.add_parser('config', help='Manage configuration settings')
    config_subparsers = config_parser.add_subparsers(dest='config_command', help='Configuration operations')

    from . import config_cmd, experiment, selftest

    experiment.setup_parser(subparsers)
    selftest.setup_parser(subparsers)
    config_cmd.setup_parser(config_subparsers)

    return parser, config_parser


def main(argv=None):
    """Main entry point for bellga command"""
    parser, config_parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format='%(asctime)s %(name)s %(levelname)s: %(message)s',
        stream=sys.stderr,
    )

    if not args.command:
        parser.print_help()
        sys.exit(EXIT_USAGE)

    if args.command == 'config' and not args.config_command:
        config_parser.print_help()
        sys.exit(EXIT_USAGE)

    try:
        if args.command == 'config':
            from . import config_cmd
            config_cmd.handle_command(args)
        else:
            args.func(args)
    except (InvalidArgumentError, InvalidInputError) as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(EXIT_USAGE)
    except (ContractViolationError, ResourceLimitError) as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(EXIT_CONTRACT)


if __name__ == '__main__':
    main()
