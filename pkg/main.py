"""
Command-line entry point for the Hardy inequality laboratory

    python main.py validate <config>
    python main.py verify <config>
    python main.py probe <config>
    python main.py report <config> --format json|csv --out <path>
    python main.py frs <p>
    python main.py constants <family> Q=<Q> key=value ...
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import catalog
from config import settings
from errors import ConfigError, HardyLabError
from models import Family, HomogeneousSetting, InequalityParams
from runconfig import parse_config
from runner import emit, run
from sharpness import frs_constant
from utils import format_error_message, setup_logging

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=settings.APP_NAME, description=settings.APP_DESCRIPTION)
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="logging level (default from HARDYLAB_LOG_LEVEL)")
    parser.add_argument("--workers", type=int, default=None, help="worker threads (default from HARDYLAB_WORKERS)")
    commands = parser.add_subparsers(dest="command", required=True)

    for name, text in (("validate", "check admissibility of every instance"),
                       ("verify", "evaluate every instance on its profiles and run identity checks"),
                       ("probe", "run the sharpness probes")):
        sub = commands.add_parser(name, help=text)
        sub.add_argument("config", help="run config file")

    report = commands.add_parser("report", help="run everything and write a report")
    report.add_argument("config", help="run config file")
    report.add_argument("--format", choices=("json", "csv"), default=None)
    report.add_argument("--out", default=None, help="output path (default: [output] path, else stdout)")

    frs = commands.add_parser("frs", help="print the constant c_p")
    frs.add_argument("p", type=float)

    constants = commands.add_parser("constants", help="print the sharp constant of a family")
    constants.add_argument("family", choices=[f.value for f in Family])
    constants.add_argument("params", nargs="*", help="key=value pairs; Q (and optionally sigma) define the setting")
    return parser


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text)


def _summary(report) -> None:
    for item in report.items:
        line = f"{item.index:4d}  {item.kind:<12} {item.name:<32} {item.verdict}"
        ratio = item.result.get("ratio", item.result.get("relative_gap"))
        if isinstance(ratio, float):
            line += f"  ({'ratio' if 'ratio' in item.result else 'gap'} {ratio:.6g})"
        print(line)


def _constants(family: str, pairs: List[str]) -> int:
    fields, sigma, Q = {}, 1.0, None
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ConfigError(f"expected key=value, got '{pair}'")
        try:
            if key == "Q":
                Q = float(value)
            elif key == "sigma":
                sigma = float(value)
            elif key == "k":
                fields[key] = int(value)
            else:
                fields[key] = float(value)
        except ValueError:
            raise ConfigError(f"invalid value for {key}: '{value}'") from None
    if Q is None:
        raise ConfigError("constants needs Q=<homogeneous dimension>")
    try:
        params = InequalityParams(**fields)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    setting = HomogeneousSetting(Q=Q, sigma=sigma)
    verdict = catalog.validate(Family(family), params, setting)
    if not verdict.admissible:
        print(f"{family}: inadmissible")
        for condition in verdict.failed_conditions:
            print(f"  failed: {condition}")
        return settings.EXIT_USAGE
    constant = catalog.sharp_constant(catalog.make_instance(Family(family), params, setting))
    print(f"{family}: constant = {constant.value!r} ({constant.claim.value})")
    if verdict.classical_ckn_status.value != "not_applicable":
        print(f"  classical CKN range: {verdict.classical_ckn_status.value}")
    return settings.EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        if args.command == "frs":
            print(repr(frs_constant(args.p)))
            return settings.EXIT_OK
        if args.command == "constants":
            return _constants(args.family, args.params)
        config = _load(args.config)
        mode = args.command
        report = run(config, mode, args.workers)
        if mode == "report":
            fmt = args.format or config.output.format
            path = args.out or config.output.path
            text = emit(report, fmt, path)
            if not path:
                sys.stdout.write(text)
        else:
            _summary(report)
            if config.output.path:
                emit(report, config.output.format, config.output.path)
        return report.exit_code()
    except (HardyLabError, ValueError) as exc:
        print(format_error_message(str(exc)), file=sys.stderr)
        return settings.EXIT_USAGE
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return settings.EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
