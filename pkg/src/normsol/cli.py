"""Command line: ``normsol {solve,sweep,check,constants} [--config PATH] [--out DIR] [--seed INT] [--key=value ...]``."""

from __future__ import annotations

import argparse
import sys

from .config import OUT_ENV, key_help, load_config
from .errors import ConfigError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

MODES = {
    "solve": "minimax descent plus Newton refinement; writes profile.csv and report.json",
    "sweep": "solves across a log-spaced mu range; writes sweep.csv and summary.json",
    "check": "runs the property suite and prints a pass/fail table",
    "constants": "Sobolev, Gagliardo-Nirenberg and Trudinger-Moser estimates; writes constants.json",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message, "arguments")


def build_parser() -> argparse.ArgumentParser:
    epilog = ("configuration keys (config file lines 'key = value', or --key=value):\n" + key_help()
              + f"\n\nexit status: 0 success, 1 failure, 2 configuration error."
              + f"\noutput directory: --out, else ${OUT_ENV}, else the current directory.")
    p = _Parser(prog="normsol", description="Normalized solutions of -lap u = lam u + f(u), |u|_2 = a.",
                epilog=epilog, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="store_true", help="print the version and exit")
    sub = p.add_subparsers(dest="mode", metavar="MODE")
    for mode, text in MODES.items():
        sp = sub.add_parser(mode, help=text, description=text, epilog=epilog,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.add_argument("--config", metavar="PATH", help="key = value configuration file")
        sp.add_argument("--out", metavar="DIR", help="output directory")
        sp.add_argument("--seed", metavar="INT", help="random seed for sampled checks")
    return p


def _overrides(extra: list[str]) -> dict:
    out = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or len(tok) < 3:
            raise ConfigError(f"unexpected argument {tok!r}", tok.lstrip("-") or tok)
        body = tok[2:]
        if "=" in body:
            key, val = body.split("=", 1)
        elif i + 1 < len(extra) and not extra[i + 1].startswith("--"):
            key, val = body, extra[i + 1]
            i += 1
        else:
            raise ConfigError(f"option --{body} needs a value", body)
        out[key.replace("-", "_")] = val
        i += 1
    return out


def main(argv=None) -> int:
    from . import __version__
    from .runs import run_checks, run_constants, run_solve, run_sweep

    try:
        parser = build_parser()
        args, extra = parser.parse_known_args(argv)
        if args.version:
            print(__version__)
            return EXIT_OK
        if args.mode is None:
            parser.print_help()
            return EXIT_CONFIG
        overrides = _overrides(extra)
        for key in ("out", "seed"):
            if getattr(args, key) is not None:
                overrides[key] = getattr(args, key)
        cfg = load_config(args.mode, args.config, overrides)
    except ConfigError as exc:
        print(f"normsol: configuration error (key {exc.key!r}): {exc}", file=sys.stderr)
        return EXIT_CONFIG

    runner = {"solve": run_solve, "sweep": run_sweep, "check": run_checks, "constants": run_constants}[cfg.mode]
    try:
        return runner(cfg)
    except OSError as exc:
        print(f"normsol: I/O error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
