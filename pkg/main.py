import argparse
import json
import logging
import sys
import time
from typing import Any, Dict, List, Optional, Union

from PyQt6.QtCore import QCoreApplication

from constants import (
    APP_NAME,
    EXIT_CONFIG_ERROR,
    EXIT_FAIL,
    EXIT_INCONCLUSIVE,
    EXIT_PASS,
    LOG_FORMAT,
    VERSION,
)
from managers.job_manager import JobManager, precision_of
from managers.sweep_manager import SweepManager
from managers.verify_manager import VerifyManager, suite_grid
from models.job_config import POLYGON_KINDS, SUITES, GridSpec, JobConfig
from utils.errors import ConfigError, TadicError
from utils.settings_manager import SettingsManager

logger = logging.getLogger(__name__)


class CliParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors map to the config-error exit code"""

    def error(self, message):
        raise ConfigError(message)


def _common_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", help="JSON job file; overrides flags")
    parent.add_argument("--output", help="Write the JSON result here")
    parent.add_argument("--verbose", action="store_true", help="Debug logging")
    parent.add_argument("--log-file", help="Also log to this file")
    parent.add_argument("--save-settings", action="store_true")
    parent.add_argument("--K", type=int, help="p-adic precision")
    parent.add_argument("--guard-terms", type=int)
    parent.add_argument("--max-rounds", type=int, help="Escalation round cap")
    parent.add_argument("--enumeration-guard", type=int)
    parent.add_argument("--workers", type=int)
    parent.add_argument("--timing", action="store_true", default=None)
    parent.add_argument("--allow-inconclusive", action="store_true", default=None)
    return parent


def _field_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--p", type=int, required=True)
    parent.add_argument("--q", type=int, help="Field size, a power of p")
    parent.add_argument("--modulus", help="Comma-separated ascending coefficients")
    parent.add_argument("--generator", help="Unit group generator, code or text")
    parent.add_argument("--d", type=int, required=True)
    parent.add_argument("--k", type=int)
    parent.add_argument("--u", type=int, default=0)
    parent.add_argument("--literal-trivial", action="store_true", default=None)
    parent.add_argument("--coeffs", help='"a1=3,ad=5" or a JSON object')
    return parent


def _grid_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--p", help="Comma-separated primes")
    parent.add_argument("--d", help="Comma-separated degrees")
    parent.add_argument("--k", help="Comma-separated k values")
    parent.add_argument("--q-exponents", help="Comma-separated b with q = p^b")
    parent.add_argument("--u", help="Twist range lo,hi")
    parent.add_argument("--M", type=int)
    parent.add_argument("--m", type=int)
    parent.add_argument("--samples", type=int)
    parent.add_argument("--exhaustive", action="store_true", default=None)
    parent.add_argument("--both-conventions", action="store_true", default=None)
    parent.add_argument("--seed", type=int)
    return parent


def build_parser() -> CliParser:
    parser = CliParser(prog="tadic", description=APP_NAME)
    parser.add_argument("--version", action="version", version=VERSION)
    common, field, grid = _common_parent(), _field_parent(), _grid_parent()
    commands = parser.add_subparsers(dest="command", required=True)

    polygon = commands.add_parser("polygon", parents=[common, field])
    polygon.add_argument("kind", choices=POLYGON_KINDS)
    polygon.add_argument("--points", type=int, required=True)
    polygon.add_argument("--csv", help="Also write m,value,slope rows here")

    lfun = commands.add_parser("lfun", parents=[common, field])
    lfun.add_argument("--m", type=int, default=1)
    lfun.add_argument("--L-terms", type=int, dest="L_terms")

    cfun = commands.add_parser("cfun-dwork", parents=[common, field])
    cfun.add_argument("--M", type=int, required=True)
    cfun.add_argument("--J", type=int)
    cfun.add_argument("--N-pi", type=int, dest="N_pi")
    cfun.add_argument("--strict", action="store_true", default=None)

    verify = commands.add_parser("verify", parents=[common, grid])
    verify.add_argument("--suite", choices=SUITES)
    verify.add_argument("--trials", type=int)
    verify.add_argument("--replay", help="Re-run the config embedded in a report")
    verify.add_argument("--row", type=int, help="With --replay, re-run only this row")

    sweep = commands.add_parser("sweep", parents=[common, grid])
    sweep.add_argument("--out", dest="csv", help="Dataset CSV path")
    sweep.add_argument("--with-cfun", action="store_true", default=None)
    return parser


def configure_logging(verbose: bool, log_file: Optional[str] = None):
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


def parse_coeffs(text: Optional[str]) -> Optional[Dict[str, Any]]:
    """Coefficients from "a1=3,ad=1+t" or a JSON object"""
    if not text:
        return None
    if text.lstrip().startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Invalid field 'coeffs': {e}")
    coeffs: Dict[str, Any] = {}
    for part in text.split(","):
        name, sep, value = part.partition("=")
        if not sep:
            raise ConfigError(f"Invalid field 'coeffs': {part!r} has no '='")
        value = value.strip()
        coeffs[name.strip()] = int(value) if value.lstrip("-").isdigit() else value
    return coeffs


def parse_generator(text: Optional[str]) -> Optional[Union[int, str]]:
    """An integer code such as "7" or field element text such as "1+t" """
    if text is None:
        return None
    text = text.strip()
    return int(text) if text.isdigit() else text


def _grid_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        "p": args.p,
        "d": args.d,
        "k": args.k,
        "b": args.q_exponents,
        "u": args.u,
        "M": args.M,
        "m": args.m,
        "samples": args.samples,
        "exhaustive": args.exhaustive,
        "both_conventions": args.both_conventions,
    }


def command_flags(args: argparse.Namespace) -> Dict[str, Any]:
    """Flags given on the command line, keyed like JobConfig fields"""
    flags: Dict[str, Any] = {"command": args.command}
    for name in (
        "output",
        "K",
        "guard_terms",
        "max_rounds",
        "enumeration_guard",
        "workers",
        "timing",
        "allow_inconclusive",
    ):
        flags[name] = getattr(args, name)
    if args.command in ("polygon", "lfun", "cfun-dwork"):
        for name in ("p", "q", "d", "k", "u", "literal_trivial"):
            flags[name] = getattr(args, name)
        flags["modulus"] = args.modulus
        flags["generator"] = parse_generator(args.generator)
        flags["coeffs"] = parse_coeffs(args.coeffs)
    if args.command == "polygon":
        flags.update(kind=args.kind, points=args.points, csv=args.csv)
    elif args.command == "lfun":
        flags.update(m=args.m, L_terms=args.L_terms)
    elif args.command == "cfun-dwork":
        flags.update(M=args.M, J=args.J, N_pi=args.N_pi, strict=args.strict)
    elif args.command == "verify":
        flags.update(suite=args.suite, seed=args.seed, trials=args.trials)
        if args.suite:
            flags["grid"] = suite_grid(args.suite, _grid_overrides(args)).to_dict()
    elif args.command == "sweep":
        flags.update(seed=args.seed, csv=args.csv, with_cfun=args.with_cfun)
        overrides = {k: v for k, v in _grid_overrides(args).items() if v is not None}
        flags["grid"] = GridSpec.from_dict(overrides).to_dict()
    return flags


def read_config_file(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r") as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot read job file {path}: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"Job file {path} must hold a JSON object")
    return data


def emit(text: str, path: Optional[str] = None):
    if path:
        with open(path, "w") as handle:
            handle.write(text)
        logger.info(f"Wrote {path}")
    else:
        sys.stdout.write(text)


def resolve_config(args: argparse.Namespace, settings: SettingsManager) -> JobConfig:
    if getattr(args, "replay", None):
        return VerifyManager.load_replay(args.replay)
    defaults: Dict[str, Any] = dict(settings.load_precision())
    defaults["workers"] = settings.load_workers()
    flags = command_flags(args)
    file_values = read_config_file(args.config) if args.config else None
    if file_values and isinstance(file_values.get("grid"), dict) and "grid" in flags:
        file_values = dict(file_values, grid={**flags["grid"], **file_values["grid"]})
    return JobConfig.resolve(defaults, flags, file_values)


def execute_row_replay(args: argparse.Namespace) -> int:
    if not args.replay:
        raise ConfigError("Invalid field 'row': requires --replay")
    report = VerifyManager.replay_row(args.replay, args.row)
    emit(report.dumps(), args.output)
    return report.exit_code(bool(args.allow_inconclusive))


def execute(config: JobConfig) -> int:
    started = time.perf_counter()
    if config.command == "verify":
        manager = VerifyManager(config)
        report = manager.run()
        emit(report.dumps(), config.output)
        return manager.exit_code(report)
    if config.command == "sweep":
        sweep = SweepManager(config)
        rows = sweep.run()
        text = sweep.write(rows, config.csv or config.output)
        if not (config.csv or config.output):
            sys.stdout.write(text)
        return EXIT_FAIL if sweep.failures else EXIT_PASS
    code, document = JobManager(config).run()
    if config.timing:
        document["wallTime"] = f"{time.perf_counter() - started:.3f}"
    emit(json.dumps(document, sort_keys=True, indent=2) + "\n", config.output)
    return code


def run(argv: Optional[List[str]] = None) -> int:
    """Parse, resolve and execute one command; returns the exit code"""
    app = QCoreApplication.instance() or QCoreApplication(sys.argv[:1])
    app.setApplicationName(APP_NAME)
    app.setApplicationVersion(VERSION)

    try:
        args = build_parser().parse_args(argv)
    except ConfigError as e:
        configure_logging(False)
        logger.error(f"Usage error: {e}")
        return EXIT_CONFIG_ERROR
    configure_logging(args.verbose, args.log_file)

    try:
        if getattr(args, "row", None) is not None:
            return execute_row_replay(args)
        settings = SettingsManager()
        config = resolve_config(args, settings)
        if args.save_settings:
            settings.save_precision(precision_of(config))
            settings.save_workers(config.workers)
        code = execute(config)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR
    except (TadicError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_FAIL

    if code == EXIT_INCONCLUSIVE and config.allow_inconclusive:
        return EXIT_PASS
    return code


def main():
    """Main application entry point"""
    sys.exit(run())


if __name__ == "__main__":
    main()
