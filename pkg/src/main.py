"""
Command line entry point for MuskatLab.

Subcommands:
    run <config>                 integrate a scenario and print its verdicts
    accept                       run the acceptance suite and print its summary
    probe <config> <points>      print the velocity at query points
    convergence <config>         measure the temporal order of a run

Exit status is 0 when every verdict passes, 1 when a verdict fails and 2 on
configuration, numerical or output errors.
"""

import sys
import argparse
import logging
from typing import List, Optional

from . import __version__
from .config import ConfigManager
from .harness import convergence, format_summary, probe, run_acceptance, run_scenario
from .utils import MuskatLabError, log_exception, setup_logging

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_ERROR = 2


def parse_arguments(argv: Optional[List[str]] = None):
    """
    Parse command-line arguments.

    Returns:
        argparse.Namespace: Parsed arguments
    """
    parser = argparse.ArgumentParser(
        prog='muskat-lab',
        description="MuskatLab - numerical laboratory for the equal-viscosity Muskat problem"
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', help='Output directory (overrides output.dir and MUSKAT_LAB_OUT)')
    common.add_argument(
        '--override',
        action='append',
        default=[],
        metavar='KEY=VALUE',
        help='Override a configuration key (repeatable)'
    )
    common.add_argument('--threads', type=int, help='Quadrature worker threads (0 = one per CPU)')
    common.add_argument(
        '--log-level',
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
        help='Set logging level'
    )

    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', parents=[common], help='Run a configured scenario')
    run.add_argument('config', help='Path to a flat configuration file')

    accept = commands.add_parser('accept', parents=[common], help='Run the acceptance suite')
    accept.add_argument('--slow', action='store_true', help='Include rows marked slow')
    accept.add_argument('--only', type=int, nargs='+', metavar='ROW',
                        help='Run only the given row numbers')

    probe_cmd = commands.add_parser('probe', parents=[common],
                                    help='Velocity of the initial interface at query points')
    probe_cmd.add_argument('config', help='Path to a flat configuration file (2-D)')
    probe_cmd.add_argument('points', help='File with one "x1 x2 x3" triple per line')

    conv = commands.add_parser('convergence', parents=[common],
                               help='Temporal self-convergence of a configured run')
    conv.add_argument('config', help='Path to a flat configuration file')

    return parser.parse_args(argv)


def _overrides(args) -> List[str]:
    overrides = list(args.override)
    if args.threads is not None:
        overrides.append(f"runtime.threads={args.threads}")
    if args.log_level:
        overrides.append(f"logs.level={args.log_level}")
    return overrides


def _load(args):
    manager = ConfigManager(args.config, overrides=_overrides(args))
    setup_logging(config_manager=manager)
    return manager.to_run_config(output_dir=args.out)


def _print_verdicts(verdicts) -> int:
    for verdict in verdicts:
        print(verdict.report_line())
    return EXIT_PASS if all(v.passed for v in verdicts) else EXIT_FAIL


def _read_points(path: str) -> str:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return f.read()
    except OSError as e:
        raise MuskatLabError(f"cannot read points file {path}: {e}") from e


def dispatch(args) -> int:
    if args.command == 'accept':
        setup_logging(log_level=args.log_level or 'INFO', enable_file=False)
        result = run_acceptance(args.out, args.override, slow=args.slow, only=args.only,
                                threads=args.threads)
        print(format_summary(result))
        return result.exit_status

    config = _load(args)
    if args.command == 'run':
        return _print_verdicts(run_scenario(config).verdicts)
    if args.command == 'probe':
        for line in probe(config, _read_points(args.points)):
            print(line)
        return EXIT_PASS
    return _print_verdicts(convergence(config))


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main application entry point.
    """
    args = parse_arguments(argv)
    try:
        return dispatch(args)
    except MuskatLabError as e:
        if logger.isEnabledFor(logging.DEBUG):
            log_exception(e, logger)
        print(f"Error: {e.user_message()}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:
        log_exception(e, logger)
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
