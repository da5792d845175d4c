"""Command-line entry point: ``hessflow <command> --config <path> [--out <dir>]``."""

import argparse
import sys

from ..exceptions import ConfigError
from .config import COMMANDS, load_config
from .scenario import EXIT_CONFIG, run_scenario


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the config code; 2 is reserved for solver degeneracy."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(
        prog="hessflow",
        description="m-Hessian evolution solver, barrier certificates, cone and curvature checks.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="scenario config file (INI format)")
    parser.add_argument("--out", default="hessflow-out", help="output directory (default: %(default)s)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        report = run_scenario(cfg, args.out, command=args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    stream = sys.stdout if report.code == 0 else sys.stderr
    print(report.message, file=stream)
    return report.code


if __name__ == "__main__":
    sys.exit(main())
