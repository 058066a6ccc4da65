"""Command-line entry point: ``metrosearch <command> --config cfg.json --out dir``.

Exit status is 0 when every checked bound holds, 2 when a bound check
fails and 1 for usage or configuration errors.
"""

import argparse
import sys

from . import __version__
from .exceptions import ConfigError, MetroSearchError
from .experiment import COMMANDS, FORMATS, load_config, resolve_config, run_experiment
from .probeopt import THREADS_ENV

EXIT_OK, EXIT_USAGE, EXIT_BOUND = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(text):
    try:
        v = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"must be an unsigned 64-bit integer: {text!r}")
    return v


def build_parser():
    p = _Parser(prog="metrosearch", description=__doc__.splitlines()[0],
                epilog=f"Set {THREADS_ENV} to cap optimizer threads.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="JSON config file")
        s.add_argument("--seed", type=_seed, default=None, help="RNG seed (overrides config)")
        s.add_argument("--out", default=None, help="output directory (overrides config)")
        s.add_argument("--format", choices=FORMATS, default=None, help="which outputs to write")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        raw = load_config(args.config)
        cfg = resolve_config(args.command, raw, args.out, args.seed, args.format)
        result = run_experiment(cfg)
    except ConfigError as exc:
        print(f"metrosearch: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MetroSearchError as exc:
        print(f"metrosearch: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"metrosearch: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for path in result.files:
        print(path)
    failed = [r.bound_name for r in result.reports if r.satisfied is False]
    if failed:
        print(f"metrosearch: bound check failed: {', '.join(sorted(set(failed)))}", file=sys.stderr)
        return EXIT_BOUND
    return EXIT_OK
