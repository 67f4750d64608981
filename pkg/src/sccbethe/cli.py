"""Command-line entry point: ``sccbethe <subcommand> [config] [--set key=value ...]``.

Exit codes: 0 success, 1 validation failure, 2 solver failure, 3 config error.
The worker count comes from ``workers`` in the config or ``SCCBETHE_WORKERS``.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import experiments
from .config import load_config, resolve_workers
from .errors import ConfigError, ModelError, SCCError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2
EXIT_CONFIG = 3

COMMANDS = {
    "spectrum": experiments.run_spectrum,
    "seed-sweep": experiments.run_seed_sweep,
    "dwell-sweep": experiments.run_dwell_sweep,
    "phase-sweep": experiments.run_phase_sweep,
    "eta1-sweep": experiments.run_eta1_sweep,
    "validate": experiments.run_validate,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    parser = _Parser(prog="sccbethe", description="Exact Bethe-ansatz SCC interferometer sweeps.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", nargs="?", help="flat key = value config file")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
        p.add_argument("--stdout", action="store_true", help="write data to stdout instead of a file")
    return parser


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _meta(value) -> str:
    # shortest round-trip form keeps the header readable and exact
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ",".join(_meta(v) for v in value)
    return format_cell(value)


def _config_items(command, cfg):
    return [("command", command)] + [(key, _meta(cfg[key])) for key in sorted(cfg)]


def render_csv(command, cfg, result) -> str:
    lines = [f"# {k}={v}" for k, v in _config_items(command, cfg)]
    lines += [f"# summary.{k}={format_cell(v)}" for k, v in result.summary.items()]
    lines.append(",".join(result.columns))
    for row in result.rows:
        cells = []
        for value in row:
            cell = format_cell(value)
            if "," in cell or '"' in cell:
                cell = '"' + cell.replace('"', '""') + '"'
            cells.append(cell)
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def render_json(command, cfg, result) -> str:
    doc = {
        "config": dict(_config_items(command, cfg)),
        "summary": result.summary,
        "rows": [dict(zip(result.columns, row)) for row in result.rows],
    }
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def _write(command, cfg, result, to_stdout):
    text = (render_json if cfg["format"] == "json" else render_csv)(command, cfg, result)
    if to_stdout:
        sys.stdout.write(text)
        return None
    try:
        os.makedirs(cfg["output"], exist_ok=True)
        path = os.path.join(cfg["output"], f"{command}.{cfg['format']}")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write output: {exc}") from exc
    return path


def _summary_line(command, result, path):
    parts = [f"{k}={format_cell(v) if not isinstance(v, float) else format(v, '.6g')}"
             for k, v in result.summary.items()]
    status = "ok" if result.passed else "FAILED"
    where = f" -> {path}" if path else ""
    return f"{command}: {status} " + " ".join(parts) + where


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        cfg = load_config(args.config, args.overrides)
        workers = resolve_workers(cfg)
        result = COMMANDS[args.command](cfg, workers)
        path = _write(args.command, cfg, result, args.stdout)
    except (ConfigError, ModelError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SCCError as exc:
        op = getattr(exc, "operation", "run")
        print(f"solver failure in {op}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    for line in result.report:
        print(line)
    print(_summary_line(args.command, result, path), file=sys.stderr if args.stdout else sys.stdout)
    return EXIT_OK if result.passed else EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
