"""Command-line front end.

Configuration precedence is command line > config file > defaults.  The
config file is INI-style::

    [params]
    delta = 0.0
    j = 1.0
    f = 0.3
    gamma1 = 0.4
    gamma2 = 1.6

    [axes]
    ; name:start:stop:num[:log]
    axis1 = gamma1:0:2:101
    axis2 = gamma2:0:2:101

    [sweep]
    engine = analytic
    format = csv
    jobs = 1

    [oracle]
    cutoff = 16        ; or "44,14" for per-mode cutoffs
    tail_tol = 1e-6
    dim2_budget = 600000

    [transient]
    times = 0,0.5,1,2
    a0 = 0.3+0.2j; 0

    [linecut]
    f_values = 10,20

    [verify]
    tol = 1e-5

Exit codes: 0 success, 1 configuration error, 2 verification failure,
3 oracle resource failure.
"""
from __future__ import annotations

import argparse
import configparser
import sys
from typing import Sequence

from .errors import ConfigError, CutoffTooSmall, EpnoiseError
from .sweep import (
    PARAM_NAMES,
    SweepAxis,
    SweepSpec,
    SweepTable,
    cmd_intensity_map,
    cmd_linecut,
    cmd_snr_map,
    cmd_stability_map,
    cmd_transient,
    cmd_verify,
    verify_failures,
)

_COMMANDS = {
    "stability-map": cmd_stability_map,
    "intensity-map": cmd_intensity_map,
    "linecut": cmd_linecut,
    "snr-map": cmd_snr_map,
    "transient": cmd_transient,
    "verify": cmd_verify,
}

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VERIFY = 2
EXIT_RESOURCE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); our contract says 1
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="epnoise", description=(
        "Quantum noise of two coupled bosonic modes with gain and drain: "
        "parameter sweeps, exceptional-point transients, and "
        "analytic-vs-oracle verification."
    ))
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        sp = sub.add_parser(name, help=fn.__doc__.splitlines()[0].lower())
        sp.add_argument("--config", metavar="PATH", help="INI config file")
        sp.add_argument("--out", metavar="PATH", help="output file (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default=None)
        sp.add_argument(
            "--engine", choices=("analytic", "oracle", "both"), default=None
        )
        sp.add_argument("--jobs", type=int, default=None, metavar="N")
        sp.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="NAME=VALUE",
            dest="overrides",
            help="override a system parameter (repeatable)",
        )
    return parser


def _parse_axis(text: str) -> SweepAxis:
    parts = [p.strip() for p in text.split(":")]
    if len(parts) not in (4, 5):
        raise ConfigError(f"axis must be name:start:stop:num[:log], got {text!r}")
    scale = parts[4] if len(parts) == 5 else "linear"
    try:
        return SweepAxis(parts[0], float(parts[1]), float(parts[2]), int(parts[3]), scale)
    except ValueError as err:
        raise ConfigError(f"bad axis {text!r}: {err}") from None


def _parse_floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())
    except ValueError as err:
        raise ConfigError(f"bad number list {text!r}: {err}") from None


def _parse_cutoff(text: str):
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    try:
        values = [int(p) for p in parts]
    except ValueError as err:
        raise ConfigError(f"bad cutoff {text!r}: {err}") from None
    if len(values) == 1:
        return values[0]
    if len(values) == 2:
        return (values[0], values[1])
    raise ConfigError(f"cutoff takes one or two integers, got {text!r}")


def _spec_from_config(path: str | None, args) -> tuple[SweepSpec, str]:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if path is not None:
        read = cp.read(path)
        if not read:
            raise ConfigError(f"cannot read config file {path!r}")

    fmt = "csv"
    if cp.has_option("sweep", "format"):
        fmt = cp.get("sweep", "format").strip()
        if fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {fmt!r}")
    if args.format is not None:
        fmt = args.format

    fixed: dict = {}
    if cp.has_section("params"):
        for key, value in cp.items("params"):
            if key not in PARAM_NAMES:
                raise ConfigError(f"unknown parameter {key!r} in [params]")
            try:
                fixed[key] = float(value)
            except ValueError:
                raise ConfigError(f"parameter {key} = {value!r} is not a number") from None

    axes = []
    if cp.has_section("axes"):
        for _, value in sorted(cp.items("axes")):
            axes.append(_parse_axis(value))

    sweep_kw: dict = {"axes": tuple(axes), "fixed": fixed}
    if cp.has_option("sweep", "engine"):
        sweep_kw["engine"] = cp.get("sweep", "engine").strip()
    if cp.has_option("sweep", "jobs"):
        sweep_kw["jobs"] = cp.getint("sweep", "jobs")
    if cp.has_option("oracle", "cutoff"):
        sweep_kw["cutoff"] = _parse_cutoff(cp.get("oracle", "cutoff"))
    if cp.has_option("oracle", "tail_tol"):
        sweep_kw["tail_tol"] = cp.getfloat("oracle", "tail_tol")
    if cp.has_option("oracle", "dim2_budget"):
        sweep_kw["dim2_budget"] = cp.getint("oracle", "dim2_budget")
    if cp.has_option("transient", "times"):
        sweep_kw["times"] = _parse_floats(cp.get("transient", "times"))
    if cp.has_option("transient", "a0"):
        raw = cp.get("transient", "a0").split(";")
        if len(raw) != 2:
            raise ConfigError("a0 needs two complex numbers separated by ';'")
        try:
            sweep_kw["a0"] = (complex(raw[0].strip()), complex(raw[1].strip()))
        except ValueError as err:
            raise ConfigError(f"bad a0: {err}") from None
    if cp.has_option("linecut", "f_values"):
        sweep_kw["f_values"] = _parse_floats(cp.get("linecut", "f_values"))
    if cp.has_option("verify", "tol"):
        sweep_kw["tol"] = cp.getfloat("verify", "tol")

    # command line wins over the file
    if args.engine is not None:
        sweep_kw["engine"] = args.engine
    if args.jobs is not None:
        sweep_kw["jobs"] = args.jobs
    for item in args.overrides:
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep:
            raise ConfigError(f"--set needs NAME=VALUE, got {item!r}")
        if name not in PARAM_NAMES:
            raise ConfigError(f"--set {name!r}: unknown parameter")
        try:
            fixed[name] = float(value)
        except ValueError:
            raise ConfigError(f"--set {name}={value!r} is not a number") from None

    try:
        return SweepSpec(**sweep_kw), fmt
    except EpnoiseError:
        raise
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err)) from None


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        spec, fmt = _spec_from_config(args.config, args)
        table: SweepTable = _COMMANDS[args.command](spec)
        table.write(args.out, fmt)
    except ConfigError as err:
        print(f"epnoise: config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except CutoffTooSmall as err:
        print(f"epnoise: oracle resources exhausted: {err}", file=sys.stderr)
        return EXIT_RESOURCE
    except EpnoiseError as err:
        print(f"epnoise: {err}", file=sys.stderr)
        return EXIT_VERIFY

    if args.command == "verify":
        bad = verify_failures(table, spec.tol)
        statuses = table.column("status")
        if bad:
            print(
                f"epnoise: verify: {bad} point(s) exceed tol={spec.tol:g}",
                file=sys.stderr,
            )
            return EXIT_VERIFY
        if any(s == "CutoffTooSmall" for s in statuses):
            print(
                "epnoise: verify: oracle budget exhausted at some points",
                file=sys.stderr,
            )
            return EXIT_RESOURCE
    return EXIT_OK


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
