"""Command-line interface.

Exit codes: 0 success, 1 configuration or usage error, 2 solver error.
Data goes to --output (or stdout); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import __version__
from .config import PRESETS, SystemConfig, build_link, config_hash, parse_config, preset_text
from .errors import ConfigError, SolverError
from .inductance import self_inductances, system_matrices
from .link import sweep_link
from .serialize import link_table, write_field_csv, write_field_json
from .sweep import run_sweep

JOBS_ENV = "COILCOUPLER_JOBS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV)
    if not raw:
        return 1
    try:
        jobs = int(raw)
    except ValueError:
        raise ConfigError(f"{JOBS_ENV} must be an integer, got {raw!r}") from None
    if jobs < 1:
        raise ConfigError(f"{JOBS_ENV} must be >= 1")
    return jobs


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coilcoupler", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_source(p):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", metavar="FILE", help="configuration file")
        src.add_argument("--preset", choices=PRESETS, help="built-in configuration")

    p = sub.add_parser("inspect", help="print L and k matrices at the nominal pose")
    add_source(p)

    for name, formats, text in (
        ("sweep", ("csv", "json"), "tabulate coupling over the sweep grid"),
        ("link", ("csv",), "phasor link metrics at every sweep point"),
    ):
        p = sub.add_parser(name, help=text)
        add_source(p)
        p.add_argument("--out", choices=formats, default="csv", help="output format")
        p.add_argument("--output", "-o", metavar="PATH", help="output file (default stdout)")
        p.add_argument("--jobs", type=int, default=None, help=f"worker processes (default ${JOBS_ENV} or 1)")
        p.add_argument("--skip-invalid", action="store_true", help="record overlapping grid points as absent")

    p = sub.add_parser("presets", help="list or emit built-in configurations")
    p.add_argument("--emit", choices=PRESETS, metavar="NAME", help="write the named preset")
    p.add_argument("--output", "-o", metavar="PATH", help="output file (default stdout)")
    return parser


def _load(args) -> tuple[SystemConfig, str]:
    if args.preset:
        return parse_config(preset_text(args.preset)), args.preset
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {args.config}: {exc.strerror}") from None
    try:
        return parse_config(text), os.path.basename(args.config)
    except ConfigError as exc:
        raise ConfigError(f"{args.config}: {exc}") from None


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _format_matrix(labels, values) -> str:
    width = max(8, max(len(lbl) for lbl in labels))
    lines = [" " * width + "".join(f"{lbl:>26}" for lbl in labels)]
    for lbl, row in zip(labels, values):
        lines.append(f"{lbl:<{width}}" + "".join(f"{v!r:>26}" for v in map(float, row)))
    return "\n".join(lines)


def _cmd_inspect(args) -> int:
    cfg, _ = _load(args)
    L, k = system_matrices(cfg.coils, cfg.solver)
    out = [
        "inductance matrix [H]",
        _format_matrix(L.labels, L.values),
        "",
        "coupling matrix k",
        _format_matrix(k.labels, k.values),
        "",
    ]
    _write("\n".join(out), None)
    return 0


def _sweep_field(args, cfg: SystemConfig, name: str):
    if cfg.sweep is None:
        raise ConfigError("configuration has no [sweep] section")
    jobs = args.jobs if args.jobs is not None else _default_jobs()
    if jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    started = time.perf_counter()
    field = run_sweep(
        cfg.coils,
        cfg.sweep,
        cfg.solver,
        jobs=jobs,
        skip_invalid=args.skip_invalid,
        provenance={"config": name, "config_hash": config_hash(cfg)},
    )
    absent = int(np.sum(~field.valid))
    print(
        f"swept {field.n_points} points ({absent} absent) in {time.perf_counter() - started:.2f} s",
        file=sys.stderr,
    )
    return field


def _cmd_sweep(args) -> int:
    cfg, name = _load(args)
    field = _sweep_field(args, cfg, name)
    _write(write_field_csv(field) if args.out == "csv" else write_field_json(field), args.output)
    return 0


def _cmd_link(args) -> int:
    cfg, name = _load(args)
    if cfg.circuit is None:
        raise ConfigError("configuration has no [circuit] section")
    field = _sweep_field(args, cfg, name)
    L_diag = self_inductances(cfg.coils, cfg.solver)
    circ, exc = build_link(cfg, L_diag)
    reports = sweep_link(field, L_diag, circ, exc)
    meta = {"config": name, "config_hash": config_hash(cfg), "frequency_Hz": circ.frequency}
    _write(link_table(field, reports, meta).to_csv(), args.output)
    return 0


def _cmd_presets(args) -> int:
    if args.emit is None:
        _write("\n".join(PRESETS) + "\n", args.output)
    else:
        _write(preset_text(args.emit), args.output)
    return 0


COMMANDS = {"inspect": _cmd_inspect, "sweep": _cmd_sweep, "link": _cmd_link, "presets": _cmd_presets}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
