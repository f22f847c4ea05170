"""Command line interface.

Subcommands::

    randsum bound     --config PATH
    randsum verify    --config PATH
    randsum reproduce --id ID
    randsum sweep-rho --config PATH --rhos 0,0.05,0.1

Exit codes: 0 success, 1 configuration error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..bounds import BoundError
from ..laws import LawError
from .config import FORMATS, ConfigError, load
from .experiments import REPRODUCE, UnknownExample, cmd_bound, cmd_reproduce, cmd_sweep_rho, cmd_verify, verification_table
from .output import render_report, render_table

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2


def _common(p: argparse.ArgumentParser, with_config: bool = True):
    if with_config:
        p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--mc-budget", type=int, help="Monte Carlo draws for sampled terms")
    p.add_argument("--tail-eps", type=float, help="tail mass allowed outside truncated supports")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--format", choices=FORMATS, help="output format (default: text)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="randsum", description="Error bounds for equally-correlated random sums.")
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("bound", help="compute a bound and all of its constants"))
    _common(sub.add_parser("verify", help="compare a bound with the distance it controls"))
    rep = sub.add_parser("reproduce", help="tabulate a worked example")
    rep.add_argument("--id", required=True, help=f"one of: {', '.join(sorted(REPRODUCE))}")
    _common(rep, with_config=False)
    sw = sub.add_parser("sweep-rho", help="bound and distance across a grid of rho")
    _common(sw)
    sw.add_argument("--rhos", required=True, help="comma-separated rho values")
    sw.add_argument("--workers", type=int, default=1, help="process pool size")
    return parser


def _config(args):
    cfg = load(args.config)
    return cfg.with_overrides(
        seed=args.seed,
        mc_budget=args.mc_budget,
        tail_eps=args.tail_eps,
        output_path=args.out,
        output_format=args.format,
    )


def _emit(text: str, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_rhos(text: str):
    try:
        rhos = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--rhos must be comma-separated numbers, got {text!r}") from None
    if not rhos or any(not 0.0 <= r <= 1.0 for r in rhos):
        raise ConfigError("--rhos values must lie in [0, 1]")
    return rhos


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "reproduce":
            table = cmd_reproduce(args.id, args.tail_eps or 1e-12)
            _emit(render_table(table, args.format or "text"), args.out)
            return EXIT_OK if table.all_pass else EXIT_VERIFY
        cfg = _config(args)
        if args.command == "bound":
            _emit(render_report(cmd_bound(cfg), cfg.output_format, cfg.echo()), cfg.output_path)
            return EXIT_OK
        if args.command == "verify":
            row = cmd_verify(cfg)
            _emit(render_table(verification_table([row]), cfg.output_format), cfg.output_path)
            return EXIT_OK if row.passed else EXIT_VERIFY
        table = cmd_sweep_rho(cfg, _parse_rhos(args.rhos), args.workers)
        _emit(render_table(table, cfg.output_format), cfg.output_path)
        return EXIT_OK if table.all_pass else EXIT_VERIFY
    except (ConfigError, BoundError, LawError, UnknownExample) as exc:
        print(f"randsum: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
