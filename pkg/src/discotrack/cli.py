"""Command-line entry point: ``discotrack run <config>`` and ``discotrack plot-data``.

Exit codes: 0 ok, 2 config or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .errors import (
    ConfigError,
    DiscoTrackError,
    MissingDataError,
    NonConvergenceError,
    NumericalFailureError,
)
from .experiments import PLOT_FIELDS, load_config, plot_series, run_experiment, write_rows_csv

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
log = logging.getLogger("discotrack")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="discotrack", description="Level-set discontinuity tracking experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config", help="YAML config file")
    r.add_argument("--workers", type=int, default=None)
    r.add_argument("--out", default=None, help="root directory for run directories")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a dotted config key (repeatable)")

    q = sub.add_parser("plot-data", help="turn metrics CSVs into plot-ready series")
    q.add_argument("inputs", nargs="*", help="metrics.csv files or run directories")
    q.add_argument("--x", default="N")
    q.add_argument("--y", default="eps_l1")
    q.add_argument("-o", "--output", required=True)
    return p


def _parse_sets(items) -> dict:
    import yaml

    out = {}
    for item in items:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip()] = yaml.safe_load(raw)
    return out


def _read_rows(inputs) -> list:
    rows = []
    for name in inputs:
        p = Path(name)
        if p.is_dir():
            p = p / "metrics.csv"
        if not p.is_file():
            raise MissingDataError(f"no metrics file at {p}")
        with open(p, newline="") as fh:
            rows.extend(csv.DictReader(fh))
    return rows


def _error(kind: str, exc: Exception) -> None:
    diag = {"error": type(exc).__name__, "kind": kind, "message": str(exc)}
    extra = getattr(exc, "diagnostics", None)
    if extra:
        diag["diagnostics"] = {k: (v if isinstance(v, (int, float, str, bool)) else repr(v))
                               for k, v in extra.items()}
    print(json.dumps(diag), file=sys.stderr)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "run":
            overrides = _parse_sets(args.set)
            if args.workers is not None:
                overrides["workers"] = args.workers
            if args.seed is not None:
                overrides["seed"] = args.seed
            if not Path(args.config).is_file():
                raise MissingDataError(f"config file {args.config} does not exist")
            cfg = load_config(Path(args.config), overrides)
            run_dir, rows = run_experiment(cfg, args.out)
            for r in rows:
                log.info("%s", {k: r[k] for k in ("sweep", "method", "N", "N_ev", "eps_l1")})
            print(run_dir)
        else:
            rows = plot_series(_read_rows(args.inputs), args.x, args.y)
            write_rows_csv(rows, args.output, PLOT_FIELDS)
        return EXIT_OK
    except (NumericalFailureError, NonConvergenceError) as exc:
        _error("numerical", exc)
        return EXIT_NUMERICAL
    except (DiscoTrackError, OSError) as exc:
        _error("config", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
