"""Command line entry point ``otima``.

Exit codes: 0 success, 2 configuration error, 3 precision or convergence
failure, 4 verification mismatch.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import scans
from .config import MODELS, load_config
from .errors import ConfigError, DegenerateSignalError, DomainError, PrecisionError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECISION = 3
EXIT_MISMATCH = 4

_RUNNERS = {
    "scan-delay": scans.run_delay_scan,
    "scan-power": scans.run_power_scan,
    "signal": scans.run_signal,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="otima", description="Optical time-domain matter-wave interferometer simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("scan-delay", "visibility against pulse delay"),
        ("scan-power", "visibility and transmissivity against pulse power"),
        ("signal", "detection signal against x_S or delay"),
        ("material", "derived material and planning quantities"),
    ]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, type=Path, help="INI configuration file")
        p.add_argument("--out", type=Path, help="output CSV (default: [output] path, else stdout)")
        p.add_argument("--seed", type=int, help="override [output] seed")
        if name != "material":
            p.add_argument("--model", choices=MODELS, action="append", help="override [model] models; repeatable")
            p.add_argument("--workers", type=int, default=1, help="threads evaluating scan points")
    p = sub.add_parser("verify", help="compare closed forms against the oracles")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, help="write the report here as well")
    return parser


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            checks, report = scans.run_verify(args.level, args.seed)
            sys.stdout.write(report)
            if args.out is not None:
                args.out.write_text(report)
            if any(not c.converged for c in checks):
                return EXIT_PRECISION
            return EXIT_OK if all(c.passed for c in checks) else EXIT_MISMATCH

        cfg = load_config(args.config)
        changes = {}
        if args.seed is not None:
            changes["seed"] = args.seed
        if getattr(args, "model", None):
            changes["models"] = tuple(dict.fromkeys(args.model))
        out = args.out
        if out is not None:
            changes["out"] = str(out)
        elif cfg.out:
            out = Path(cfg.out)
            if not out.is_absolute():
                out = args.config.parent / out
        cfg = cfg.replace(**changes) if changes else cfg
        if args.command == "material":
            table = scans.run_material_report(cfg)
        else:
            table = _RUNNERS[args.command](cfg, workers=args.workers)
        _emit(table.to_csv(), out)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PrecisionError, DomainError, DegenerateSignalError) as exc:
        print(f"precision error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
