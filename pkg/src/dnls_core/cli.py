"""Command-line front end (``dnls <subcommand>``)."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import IO, Any

from .config import ExperimentConfig, parse_config
from .errors import DnlsError, InvalidArgumentError
from .presets import preset_names
from .storage import jsonable
from . import studies


logger = logging.getLogger(__name__)

LOG_FORMAT = "%(process)s %(asctime)s %(levelname)s %(name)s %(message)s"
IO_ERROR_EXIT = 4


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="configuration file")
    p.add_argument("--preset", choices=preset_names(), help="named parameter set")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one key (repeatable)")


def _run_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("run", type=Path, help="run directory written by 'simulate'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dnls", description=__doc__)
    noise = parser.add_mutually_exclusive_group()
    noise.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    noise.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate, analyse and write one run")
    _config_flags(p)
    p.add_argument("--out", type=Path, help="run directory (default: <output.dir>/run-<hash>)")

    p = sub.add_parser("fit-spatial", help="fit a spatial envelope to a stored snapshot")
    _run_arg(p)
    p.add_argument("--t", type=float, required=True, help="snapshot time (nearest is used)")
    p.add_argument("--family", choices=("linear", "quadratic", "gaussian"), default="gaussian")
    p.add_argument("--x-min", type=float)
    p.add_argument("--x-max", type=float)

    p = sub.add_parser("fit-temporal", help="fit the center-density peak envelope of a run")
    _run_arg(p)
    p.add_argument("--kappa", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--amplitude", type=float, help="pin the envelope amplitude A")

    p = sub.add_parser("detect-event", help="locate and characterize the first rogue-wave event")
    _run_arg(p)
    p.add_argument("--t-lo", type=float)
    p.add_argument("--t-hi", type=float)

    p = sub.add_parser("verify-balance", help="balance-law residuals of a stored run")
    _run_arg(p)

    p = sub.add_parser("verify-admissibility", help="driver admissibility for the configured weights")
    _config_flags(p)

    p = sub.add_parser("mms-study", help="error against a manufactured solution")
    _config_flags(p)

    p = sub.add_parser("convergence-study", help="manufactured-solution error across grid degrees")
    _config_flags(p)
    p.add_argument("--degrees", type=int, nargs="+", default=list(studies.CONVERGENCE_DEGREES))

    p = sub.add_parser("sweep", help="run a cartesian parameter grid")
    _config_flags(p)
    p.add_argument("--param", action="append", default=[], metavar="KEY=V1,V2,...",
                   help="one sweep axis (repeatable)")
    p.add_argument("--out", type=Path, help="sweep directory (default: <output.dir>/sweep)")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("plot", help="re-render the figures of a stored run")
    _run_arg(p)
    return parser


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _config_text(args: argparse.Namespace) -> str:
    if args.config is None:
        return ""
    return Path(args.config).read_text(encoding="utf-8")


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    return parse_config(_config_text(args), preset=args.preset, overrides=args.overrides)


def parse_axes(params: list[str]) -> dict[str, list[str]]:
    """``["a.b=1,2", "c=x"]`` -> ``{"a.b": ["1", "2"], "c": ["x"]}``."""
    axes: dict[str, list[str]] = {}
    for item in params:
        key, sep, values = item.partition("=")
        key = key.strip()
        if not sep or not key or not values.strip():
            raise InvalidArgumentError(f"--param expects KEY=V1,V2,..., got {item!r}")
        axes[key] = [v.strip() for v in values.split(",")]
    return axes


def _emit(document: Any, dest: IO[str]) -> None:
    print(json.dumps(jsonable(document), indent=2, sort_keys=True), file=dest)


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _dispatch(args: argparse.Namespace) -> Any:
    cmd = args.command
    if cmd == "simulate":
        record = studies.run_experiment(_load_config(args), args.out)
        return {"run_dir": record.run_dir, **record.as_dict()}
    if cmd == "fit-spatial":
        return studies.fit_spatial_command(args.run, args.t, args.family, args.x_min, args.x_max).as_dict()
    if cmd == "fit-temporal":
        return studies.fit_temporal_command(args.run, args.kappa, args.t_max, args.amplitude).as_dict()
    if cmd == "detect-event":
        window = None
        if args.t_lo is not None or args.t_hi is not None:
            if args.t_lo is None or args.t_hi is None:
                raise InvalidArgumentError("--t-lo and --t-hi go together")
            window = (args.t_lo, args.t_hi)
        return studies.detect_event_command(args.run, window)
    if cmd == "verify-balance":
        return studies.verify_balance_command(args.run)
    if cmd == "verify-admissibility":
        return studies.admissibility(_load_config(args)).__dict__
    if cmd == "mms-study":
        return studies.mms_study(_load_config(args))
    if cmd == "convergence-study":
        return studies.convergence_study(_load_config(args), args.degrees)
    if cmd == "sweep":
        text = _config_text(args)
        config = parse_config(text, preset=args.preset, overrides=args.overrides)
        out = args.out or Path(config.output.dir) / "sweep"
        return studies.sweep(text, parse_axes(args.param), out, preset=args.preset,
                             overrides=args.overrides, workers=args.workers)
    if cmd == "plot":
        record = studies.replot(args.run)
        return {"run_dir": record.run_dir, "files": record.files}
    raise InvalidArgumentError(f"unknown command {cmd!r}")


def main(argv: list[str] | None = None, dest: IO[str] | None = None) -> int:
    """Entry point of the ``dnls`` console script; returns the exit code."""
    args = build_parser().parse_args(argv)
    dest = dest or sys.stdout
    _configure_logging(args)
    logger.debug("dnls %s", args.command)
    try:
        result = _dispatch(args)
    except DnlsError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return IO_ERROR_EXIT
    _emit(result, dest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
