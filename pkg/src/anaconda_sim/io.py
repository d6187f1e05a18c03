"""Config ingestion and CSV/JSON outputs.

Numbers are written with 9 significant digits so output checksums are
stable across runs and platforms.
"""

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .harness import AggregateCurve, ConfigError, ExperimentConfig, SweepResult, TrialTrace

TRACE_COLUMNS = ("t", "sim_seconds", "f_value", "coverage_fraction", "comm_messages", "max_evals")
AGGREGATE_COLUMNS = ("time_s", "mean_coverage", "std_coverage")
_INT_COLUMNS = {"t", "comm_messages", "max_evals"}


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".9g")


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return ExperimentConfig.from_dict(data)


def config_hash(config: ExperimentConfig) -> str:
    blob = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _write_text_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _table(columns, rows, delimiter=",") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def trace_table(trace: TrialTrace, delimiter=",") -> str:
    cols = [getattr(trace, c) for c in TRACE_COLUMNS]
    return _table(TRACE_COLUMNS, zip(*cols), delimiter)


def write_trace_csv(path, trace: TrialTrace):
    _write_text_atomic(Path(path), trace_table(trace))


def read_trace_csv(path) -> TrialTrace:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TRACE_COLUMNS:
            raise ValueError(f"{path}: expected columns {','.join(TRACE_COLUMNS)}")
        rows = list(reader)
    cols = {}
    for c in TRACE_COLUMNS:
        dtype = np.int64 if c in _INT_COLUMNS else float
        cols[c] = np.array([r[c] for r in rows], dtype=float).astype(dtype)
    return TrialTrace(**cols)


def aggregate_table(curve: AggregateCurve, delimiter=",") -> str:
    return _table(AGGREGATE_COLUMNS, zip(curve.time_grid, curve.mean_coverage, curve.std_coverage), delimiter)


def read_aggregate_csv(path) -> AggregateCurve:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return AggregateCurve(data[:, 0], data[:, 1], data[:, 2])


def write_sweep(out_dir, result: SweepResult) -> list:
    """Per-trial traces, per-variant aggregates and a summary; returns relative paths."""
    out_dir = Path(out_dir)
    written = []
    for key, traces in result.traces.items():
        for k, tr in enumerate(traces):
            rel = Path("traces") / f"{key.label}_trial{k:03d}.csv"
            write_trace_csv(out_dir / rel, tr)
            written.append(str(rel))
        rel = Path("aggregates") / f"{key.label}.csv"
        _write_text_atomic(out_dir / rel, aggregate_table(result.curves[key]))
        written.append(str(rel))
    summary = {
        "variants": [
            {
                "label": key.label,
                "algorithm": key.algorithm,
                "nmax": key.nmax,
                "tau_f": key.tau_f,
                "tau_c": key.tau_c,
                "first_coverage_mean": float(fmt(result.first_coverage(key).mean())),
                "final_coverage_mean": float(fmt(result.finals(key).mean())),
                "final_coverage_std": float(fmt(result.finals(key).std())),
            }
            for key in result.traces
        ],
        "dfssg_disconnection_rate": result.disconnection_rate(),
    }
    _write_text_atomic(out_dir / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    written.append("summary.json")
    return written


def write_manifest(path, manifest: dict):
    _write_text_atomic(Path(path), json.dumps(manifest, indent=2, sort_keys=True) + "\n")
