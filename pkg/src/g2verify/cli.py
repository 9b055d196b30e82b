"""Command-line front end.

Subcommands pick which suites run; every flag can also come from a JSON
config file, with flags winning.  The process exit code is the number of
failed checks (capped at 125), so 0 means everything passed; bad
configuration exits with 126 and a message on stderr.
"""

from __future__ import annotations

import argparse
import sys
import time

from .config import SUITE_NAMES, ConfigError, RunConfig, apply_overrides, load_config
from .fields import save_snapshot
from .gallery import positivity_margin
from .report import VerificationReport, emit_report, info_check
from .suites import build_structure, run_suites

EXIT_CONFIG = 126
EXIT_CAP = 125

_SUBCOMMAND_SUITES = {
    "verify-pointwise": ("pointwise",),
    "verify-field": ("field",),
    "growth": ("growth",),
    "convergence": ("convergence",),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="g2verify",
        description="numerical verification suites for closed G2-structures")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, report_out=True):
        sp.add_argument("--config", metavar="FILE",
                        help="JSON run configuration (flags override it)")
        sp.add_argument("--suite", action="append", choices=SUITE_NAMES,
                        metavar="NAME", help="suite to run; repeatable, replaces "
                        "the subcommand default")
        sp.add_argument("--resolution", metavar="N[,N...]",
                        help="grid size for the three active axes, or all 7 "
                        "comma-separated")
        sp.add_argument("--seed", type=int, metavar="S",
                        help="seed for all random sampling")
        sp.add_argument("--format", choices=("text", "json", "csv"),
                        default="text", help="report format (default text)")
        if report_out:
            sp.add_argument("--out", metavar="FILE",
                            help="write the report here instead of stdout")

    add_common(sub.add_parser(
        "verify-pointwise", help="algebraic identity battery at a G2 point"))
    add_common(sub.add_parser(
        "verify-field", help="differential identities on the configured field"))
    add_common(sub.add_parser(
        "growth", help="volume growth, threshold and geodesic-bound analytics"))
    add_common(sub.add_parser(
        "convergence", help="identity residual ladder over a resolution pair"))
    gallery = sub.add_parser(
        "gallery", help="build the configured structure field and report its "
        "positivity margin")
    add_common(gallery, report_out=False)
    gallery.add_argument("--out", metavar="FILE",
                         help="also save the field as a binary snapshot")
    return parser


def _configure(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    suites = args.suite or _SUBCOMMAND_SUITES.get(args.command)
    return apply_overrides(cfg, resolution=args.resolution, seed=args.seed,
                           suites=suites)


def _run_gallery(cfg: RunConfig, args) -> int:
    phi = build_structure(cfg)
    rep = VerificationReport(
        "gallery construction",
        environment={
            "structure": cfg.structure_kind,
            "resolution": list(phi.values.shape[:7]),
            "chart": phi.chart.to_dict(),
        },
    )
    rep.add(info_check("grid positivity margin of the structure form",
                       "structure-positivity", positivity_margin(phi)))
    rep.add(info_check("largest coefficient of the structure form",
                       "structure-positivity", float(abs(phi.values).max())))
    if args.out:
        save_snapshot(phi, args.out)
        rep.environment["snapshot"] = args.out
    sys.stdout.write(emit_report(rep, args.format))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _configure(args)
        if args.command == "gallery":
            return _run_gallery(cfg, args)
        start = time.monotonic()
        rep = run_suites(cfg)
        rep.wall_time = time.monotonic() - start
        rendered = emit_report(rep, args.format, args.out)
        if args.out is None:
            sys.stdout.write(rendered)
        else:
            summary = rep.to_dict()["summary"]
            print(f"{summary['passed']}/{summary['total']} checks passed, "
                  f"report written to {args.out}")
        return min(rep.n_failed, EXIT_CAP)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # bad structure data (positivity failures, malformed snapshots)
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
