# src/cli/main.py
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from prometheus_client import REGISTRY, write_to_textfile

from src.cli.figures import cmd_figures
from src.cli.selfcheck import cmd_selfcheck
from src.cli.sweep import MIN_SWEEP_POINTS, OutputFormat, build_spec, cmd_measures, cmd_tei, parse_eta_range
from src.core.config import log_level, metrics_file
from src.core.errors import OscitomError, UsageError
from src.tomogram.tomogram import IPR_ETA, Indicator, SliceKind

logger = logging.getLogger("oscitom")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _add_sweep_arguments(parser: argparse.ArgumentParser) -> None:
    etas = parser.add_mutually_exclusive_group()
    etas.add_argument("--eta", type=float, nargs="+", help="Frequency ratios ω_c/ω_r")
    etas.add_argument("--eta-range", type=str, help="lo:hi:n log-spaced ratios (reciprocal pairs when lo*hi = 1, n odd)")
    parser.add_argument("--nr", type=int, nargs="+", default=None, help="Relative-mode quanta n_r (default 0)")
    parser.add_argument("--nc", type=int, default=0, help="Centre-of-mass quanta n_c")
    parser.add_argument("--points", type=int, default=None, help=f"Grid points per axis (>= {MIN_SWEEP_POINTS}; env OSCITOM_POINTS)")
    parser.add_argument(
        "--half-width",
        type=float,
        default=None,
        help=(
            "Override the automatic position-grid half-width; the momentum grid "
            "scales with it by the default momentum-to-position extent ratio"
        ),
    )
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], default="csv")
    parser.add_argument("--out", type=Path, default=None, help="Output file (default stdout)")
    parser.add_argument("--jobs", type=int, default=None, help="Concurrent sweep points (env OSCITOM_JOBS)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oscitom",
        description="Entanglement measures and tomographic indicators for two coupled oscillators.",
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR (env OSCITOM_LOG_LEVEL)")
    parser.add_argument("--metrics-file", type=Path, default=None, help="Write Prometheus metrics here on exit")
    sub = parser.add_subparsers(dest="command", required=True)

    measures = sub.add_parser("measures", help="Closed-form and numeric SLE/SVNE over (eta, n_r)")
    _add_sweep_arguments(measures)

    tei = sub.add_parser("tei", help="Tomographic entanglement indicators over (eta, n_r)")
    _add_sweep_arguments(tei)
    tei.add_argument("--indicator", choices=[i.value for i in Indicator], required=True)
    tei.add_argument("--slice", choices=[s.value for s in SliceKind], default=SliceKind.average.value)

    figures = sub.add_parser("figures", help="Write the six figure datasets and manifest.json")
    figures.add_argument("--out", type=Path, default=Path("figures"), help="Output directory")
    figures.add_argument("--format", choices=[f.value for f in OutputFormat], default="csv")
    figures.add_argument("--points", type=int, default=None)
    figures.add_argument("--jobs", type=int, default=None)

    selfcheck = sub.add_parser("selfcheck", help="Cross-check every numerical pipeline against its closed form")
    selfcheck.add_argument("--points", type=int, default=None, help="Grid points for the grid-based checks")
    return parser


def _resolve_etas(args: argparse.Namespace, default: List[float]) -> List[float]:
    if args.eta_range:
        return parse_eta_range(args.eta_range)
    return args.eta or default


def _emit(dataset, args: argparse.Namespace) -> None:
    if args.out is None:
        sys.stdout.write(dataset.render(args.format))
    else:
        dataset.write(args.out, args.format)


def _run_sweep(args: argparse.Namespace) -> int:
    default_etas = [IPR_ETA] if getattr(args, "indicator", None) == Indicator.ipr.value else [1.0]
    spec = build_spec(
        etas=_resolve_etas(args, default_etas),
        n_r=args.nr,
        n_c=args.nc,
        points=args.points,
        half_width=args.half_width,
        format=args.format,
        out=args.out,
    )
    config = {"jobs": args.jobs}
    if args.command == "measures":
        dataset, failures = cmd_measures(spec, config)
    else:
        dataset, failures = cmd_tei(spec, args.indicator, args.slice, config)
    _emit(dataset, args)
    for failure in failures:
        print(f"skipped: {failure}", file=sys.stderr)
    return EXIT_FAILED if failures else EXIT_OK


def _run_figures(args: argparse.Namespace) -> int:
    if args.points is not None and args.points < MIN_SWEEP_POINTS:
        raise UsageError(f"--points must be >= {MIN_SWEEP_POINTS}, got {args.points}")
    report = cmd_figures(args.out, fmt=args.format, points=args.points, config={"jobs": args.jobs})
    for failure in report.failures:
        print(f"skipped: {failure}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAILED


def _run_selfcheck(args: argparse.Namespace) -> int:
    report = cmd_selfcheck(points=args.points)
    sys.stdout.write(report.table())
    return EXIT_OK if report.ok else EXIT_FAILED


COMMANDS = {
    "measures": _run_sweep,
    "tei": _run_sweep,
    "figures": _run_figures,
    "selfcheck": _run_selfcheck,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or log_level()).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        status = COMMANDS[args.command](args)
    except UsageError as e:
        print(f"oscitom {args.command}: {e}", file=sys.stderr)
        status = EXIT_USAGE
    except OscitomError as e:
        logger.error(f"{args.command} failed: {e}")
        status = EXIT_FAILED
    except OSError as e:
        logger.error(f"{args.command}: {e}")
        status = EXIT_FAILED

    path = args.metrics_file or metrics_file()
    if path:
        write_to_textfile(str(path), REGISTRY)
    return status


if __name__ == "__main__":
    sys.exit(main())
