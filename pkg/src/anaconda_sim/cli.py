"""``anaconda-sim`` command line: run, verify, export.

Exit codes: 0 success, 1 verification failure, 2 usage or config error.
"""

import argparse
import dataclasses
import datetime as _dt
import json
import sys
from pathlib import Path

from . import __version__
from ._accel import backend_name
from .harness import ConfigError, run_sweep
from .io import (
    AGGREGATE_COLUMNS,
    TRACE_COLUMNS,
    config_hash,
    load_config,
    read_trace_csv,
    trace_table,
    write_manifest,
    write_sweep,
)
from .verify import SUITES, run_suite

EXIT_OK, EXIT_VERIFY_FAILED, EXIT_USAGE = 0, 1, 2
EXPORT_FORMATS = ("csv", "tsv", "json")


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def cmd_run(config_path, out_dir, seed=None, threads=1) -> int:
    try:
        config = load_config(config_path)
        if seed is not None:
            config = dataclasses.replace(config, master_seed=seed)
    except FileNotFoundError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except ConfigError as exc:
        _err(f"invalid config {config_path}: {exc}")
        return EXIT_USAGE
    if threads < 1:
        _err("--threads must be >= 1")
        return EXIT_USAGE

    started = _now()
    result = run_sweep(config, threads=threads)
    out_dir = Path(out_dir)
    try:
        outputs = write_sweep(out_dir, result)
    except OSError as exc:
        _err(f"cannot write to {out_dir}: {exc}")
        return EXIT_USAGE
    write_manifest(
        out_dir / "manifest.json",
        {
            "config": config.to_dict(),
            "config_sha256": config_hash(config),
            "master_seed": config.master_seed,
            "version": f"{__version__}+{backend_name()}",
            "started": started,
            "finished": _now(),
            "outputs": outputs,
        },
    )
    print(f"wrote {len(outputs)} files to {out_dir}")
    return EXIT_OK


def cmd_verify(suite, seed=0) -> int:
    res = run_suite(suite, seed)
    print(res.report())
    return EXIT_OK if res.passed else EXIT_VERIFY_FAILED


def _export_tables(path: Path):
    """(columns, rows, trace): a run directory yields its aggregates in long form."""
    if path.is_dir():
        files = sorted((path / "aggregates").glob("*.csv"))
        if not files:
            raise FileNotFoundError(f"no aggregates under {path}")
        rows = []
        for f in files:
            for line in f.read_text().splitlines()[1:]:
                rows.append([f.stem] + line.split(","))
        return ("variant",) + AGGREGATE_COLUMNS, rows, None
    trace = read_trace_csv(path)
    return TRACE_COLUMNS, None, trace


def cmd_export(trace_path, fmt="csv", out=None) -> int:
    path = Path(trace_path)
    if not path.exists():
        _err(f"trace not found: {path}")
        return EXIT_USAGE
    try:
        columns, rows, trace = _export_tables(path)
    except (FileNotFoundError, ValueError) as exc:
        _err(str(exc))
        return EXIT_USAGE

    if fmt in ("csv", "tsv"):
        delim = "," if fmt == "csv" else "\t"
        if trace is not None:
            text = trace_table(trace, delim)
        else:
            text = delim.join(columns) + "\n" + "".join(delim.join(r) + "\n" for r in rows)
    else:
        if trace is not None:
            body = {"source": path.stem, "columns": {c: getattr(trace, c).tolist() for c in columns}}
        else:
            body = {"source": path.name, "rows": [dict(zip(columns, [r[0]] + [float(v) for v in r[1:]])) for r in rows]}
        text = json.dumps(body, indent=1) + "\n"

    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="anaconda-sim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({backend_name()})")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a sweep from a JSON config")
    r.add_argument("--config", required=True, help="JSON file with experiment settings")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--seed", type=int, help="override master_seed")
    r.add_argument("--threads", type=int, default=1, help="parallel trials (default 1)")

    v = sub.add_parser("verify", help="run a self-check suite")
    v.add_argument("--suite", required=True, choices=sorted(SUITES))
    v.add_argument("--seed", type=int, default=0)

    e = sub.add_parser("export", help="emit plot-ready data from a trace file or run directory")
    e.add_argument("trace", help="trace CSV, or a run output directory for its aggregates")
    e.add_argument("--format", default="csv", choices=EXPORT_FORMATS)
    e.add_argument("--out", help="write here instead of stdout")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.out, args.seed, args.threads)
    if args.command == "verify":
        return cmd_verify(args.suite, args.seed)
    return cmd_export(args.trace, args.format, args.out)


if __name__ == "__main__":
    sys.exit(main())
